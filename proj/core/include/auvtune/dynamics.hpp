#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "auvtune/common.hpp"

namespace auvtune {

inline constexpr int kThrusterCount = 5;

/// Thruster indices: one surge thruster on the centreline plus two lateral
/// (rl) and two vertical (ud) thrusters at the tail.
enum ThrusterIndex : int { kSurge = 0, kRlUpper = 1, kRlLower = 2, kUdPort = 3, kUdStarboard = 4 };

/// 6-DOF vehicle state: body velocities nu = [u v w p q r] and earth-frame
/// pose eta = [n e d phi theta psi].
struct VehicleState {
  Vec6 nu = Vec6::Zero();
  Vec6 eta = Vec6::Zero();

  Vec3 position() const { return eta.head<3>(); }
  Vec3 attitude() const { return eta.tail<3>(); }
  bool finite() const { return nu.allFinite() && eta.allFinite(); }
};

struct ThrusterCommand {
  double surge = 0.0;
  double rl = 0.0;
  double ud = 0.0;

  Vec3 as_vector() const { return {surge, rl, ud}; }
  static ThrusterCommand from_vector(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

/// Realized normalized thrust of each thruster (first-order lag towards the
/// command) and the command that is currently applied.
struct ThrusterState {
  std::array<double, kThrusterCount> thrust{};
  ThrusterCommand command{};
};

/// Linear drag with the sway/heave and pitch/yaw symmetry
/// D = diag[D1, D2, D2, D4, D5, D5].
struct DragCoefficients {
  double surge = 10.0;       // D1, N s/m
  double sway_heave = 40.0;  // D2, N s/m
  double roll = 0.5;         // D4, N m s
  double pitch_yaw = 2.0;    // D5, N m s

  Vec6 diagonal() const {
    Vec6 d;
    d << surge, sway_heave, sway_heave, roll, pitch_yaw, pitch_yaw;
    return d;
  }
};

/// Weight/buoyancy and their points of action relative to the body origin.
struct RestoringConfig {
  double weight = 147.1;    // N
  double buoyancy = 147.1;  // N
  Vec3 center_of_gravity = Vec3::Zero();
  Vec3 center_of_buoyancy{0.0, 0.0, -0.01};
};

struct ThrusterGeometry {
  std::array<Vec3, kThrusterCount> position{};
  std::array<Vec3, kThrusterCount> direction{};
  std::array<double, kThrusterCount> max_force{};  // N at |thrust| = 1
};

struct HydroParams {
  Mat6 rigid_body_mass = Mat6::Identity();
  Mat6 added_mass = Mat6::Zero();
  DragCoefficients drag{};
  RestoringConfig restoring{};
  ThrusterGeometry thrusters{};
  double thruster_time_constant = 0.2;  // s
  std::array<double, kThrusterCount> thruster_gain{1.0, 1.0, 1.0, 1.0, 1.0};

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

/// Rigid-body mass matrix for a body with mass `mass`, inertia diagonal about
/// the origin and centre of gravity `cg`.
Mat6 rigid_body_mass_matrix(double mass, const Vec3& inertia, const Vec3& cg);

/// Coriolis-centripetal matrix of a symmetric 6x6 mass matrix, built with the
/// skew-symmetric construction so that x' C(x) x = 0.
Mat6 coriolis_matrix(const Mat6& mass, const Vec6& nu);

/// C(nu) nu without forming the matrix.
Vec6 coriolis_product(const Mat6& mass, const Vec6& nu);

/// Earth-to-body transformation of the 6-DOF kinematics: eta_dot = J(eta) nu.
Eigen::Matrix3d rotation_body_to_earth(const Vec3& attitude);
Eigen::Matrix3d euler_rate_transform(const Vec3& attitude);

/// Restoring forces g(eta).
Vec6 restoring_forces(const RestoringConfig& config, const Vec3& attitude);

/// Hydro parameters together with the cached factorization of the total mass
/// matrix and the thruster allocation. Constructing one validates the config.
class PlantModel {
 public:
  explicit PlantModel(HydroParams params);

  const HydroParams& params() const { return params_; }
  const Mat6& total_mass() const { return total_mass_; }
  /// Maps the five realized thrusts to generalized forces tau (6x5).
  const Eigen::Matrix<double, 6, kThrusterCount>& allocation() const { return allocation_; }
  /// Maps the three commands directly to tau with no actuator lag (6x3).
  const Eigen::Matrix<double, 6, 3>& command_allocation() const { return command_allocation_; }

  /// Body acceleration nu_dot for generalized force tau. `current_body` is the
  /// current velocity in the body frame and `current_body_rate` its time
  /// derivative seen from the body.
  Vec6 acceleration(const Vec6& nu, const Vec3& attitude, const Vec3& current_body,
                    const Vec3& current_body_rate, const Vec6& tau) const;

 private:
  HydroParams params_;
  Mat6 total_mass_;
  Eigen::LLT<Mat6> mass_factor_;
  Mat6 mass_inverse_;
  Vec6 drag_;
  Eigen::Matrix<double, 6, kThrusterCount> allocation_;
  Eigen::Matrix<double, 6, 3> command_allocation_;
};

using StateDerivative = Eigen::Matrix<double, 12, 1>;

/// Generalized forces from the realized thrust of each thruster.
Vec6 thruster_forces(const ThrusterState& thr, const PlantModel& model);

/// State derivative [nu_dot; eta_dot] of the plant. `current_earth` is the
/// earth-frame current; it is rotated to the body frame internally and only
/// the translational relative velocity is affected.
StateDerivative derivative(const VehicleState& state, const ThrusterState& thr,
                           const Vec3& current_earth, const PlantModel& model);

/// Same, for an actuator model without lag (commands map directly to forces)
/// and a current given in the body frame that is constant in that frame.
/// This is the model the estimator and the controller design use.
StateDerivative design_derivative(const VehicleState& state, const ThrusterCommand& cmd,
                                  const Vec3& current_body, const PlantModel& model);

struct StepResult {
  VehicleState state;
  ThrusterState thrusters;
};

/// One explicit RK4 step of vehicle and thruster-lag states. The current is
/// held constant over the step. Throws CrashSignal on a non-finite result.
StepResult step(const VehicleState& state, const ThrusterState& thr, const ThrusterCommand& cmd,
                const Vec3& current_earth, const PlantModel& model, double dt);

/// RK4 step of the lag-free design model.
VehicleState design_step(const VehicleState& state, const ThrusterCommand& cmd,
                         const Vec3& current_body, const PlantModel& model, double dt);

/// Relative standard deviations of the model-plant mismatch.
struct MismatchConfig {
  double drag_rel_std = 0.10;
  double mass_rel_std = 0.10;
  double added_mass_rel_std = 0.10;
  double thruster_gain_rel_std = 0.025;
};

/// Draws a perturbed copy of `nominal` from independent Gaussians; the same
/// seed always yields the same copy. Throws ConfigError when no valid draw is
/// found within a bounded number of attempts.
HydroParams perturb_params(const HydroParams& nominal, std::uint64_t seed,
                           const MismatchConfig& mismatch);

/// Default vehicle: ~15 kg, ~0.5 m, ~0.9 m/s terminal surge speed.
HydroParams default_hydro_params();

}  // namespace auvtune
