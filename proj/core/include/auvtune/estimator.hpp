#pragma once

#include <array>

#include "auvtune/dynamics.hpp"
#include "auvtune/sensors.hpp"
#include "auvtune/ukf.hpp"

namespace auvtune {

inline constexpr int kFilterStates = 14;

using FilterVector = Eigen::Matrix<double, kFilterStates, 1>;
using FilterMatrix = Eigen::Matrix<double, kFilterStates, kFilterStates>;

/// Filter state [nu(6), eta(6), u_c^b, v_c^b].
using Belief = ukf::Gaussian<kFilterStates>;

namespace filter_index {
inline constexpr int kU = 0, kV = 1, kW = 2, kP = 3, kQ = 4, kR = 5;
inline constexpr int kN = 6, kE = 7, kD = 8, kPhi = 9, kTheta = 10, kPsi = 11;
inline constexpr int kCurrentU = 12, kCurrentV = 13;
}  // namespace filter_index

inline constexpr std::array<int, 3> kFilterAngles{filter_index::kPhi, filter_index::kTheta,
                                                  filter_index::kPsi};

/// Process-noise parametrization (alpha_1..alpha_4, physical values) and the
/// known measurement covariances.
struct FilterNoiseConfig {
  std::array<double, 4> alpha{1e-6, 1e-4, 0.1, 0.01};
  double usbl_var = 0.09;
  double pressure_var = 0.24;  // kPa^2
  double ahrs_var = 7.6e-5;    // rad^2

  static FilterNoiseConfig from_sensors(const SensorConfig& sensors, std::array<double, 4> alpha);
};

/// Q = diag[Q_nu, Q_eta, Q_uc, Q_vc] with Q_uc = Q_vc = a1,
/// Q_nu = [a2 a2 a2 a2a3 a2a3 a2a3], Q_eta = a4 Q_nu.
FilterMatrix build_process_noise(const std::array<double, 4>& alpha);

/// Belief state propagated by the design model (no actuator lag, body-frame
/// current held constant), then Q dt added.
Belief predict(const Belief& belief, const ThrusterCommand& cmd, double dt, const FilterMatrix& q,
               const PlantModel& design, const ukf::Scaling& scaling = {});

/// Measurement update for a USBL, pressure, or AHRS sample.
Belief correct(const Belief& belief, const Measurement& meas, const FilterNoiseConfig& noise,
               const SensorConfig& sensors, const ukf::Scaling& scaling = {});

/// Maps a filter mean back to the vehicle state it estimates.
VehicleState vehicle_state_of(const FilterVector& mean);
FilterVector filter_state_of(const VehicleState& state, double current_u, double current_v);

class NavigationFilter {
 public:
  NavigationFilter(const PlantModel& design, const FilterNoiseConfig& noise,
                   const SensorConfig& sensors, Belief initial, ukf::Scaling scaling = {});

  void predict(const ThrusterCommand& cmd, double dt);
  void correct(const Measurement& meas);

  const Belief& belief() const { return belief_; }
  VehicleState estimate() const { return vehicle_state_of(belief_.mean); }

 private:
  const PlantModel* design_;
  FilterNoiseConfig noise_;
  SensorConfig sensors_;
  FilterMatrix q_;
  ukf::Scaling scaling_;
  Belief belief_;
};

}  // namespace auvtune
