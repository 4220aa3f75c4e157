#pragma once

#include <array>
#include <utility>

#include <Eigen/Core>

#include "auvtune/dynamics.hpp"

namespace auvtune {

/// Reduced LQR state x_fb = [u, q, r, theta, psi, u_i, theta_i, psi_i].
inline constexpr int kLqrStates = 8;
inline constexpr int kLqrInputs = 3;
inline constexpr int kReducedStates = 5;

using LqrA = Eigen::Matrix<double, kLqrStates, kLqrStates>;
using LqrB = Eigen::Matrix<double, kLqrStates, kLqrInputs>;
using LqrGain = Eigen::Matrix<double, kLqrInputs, kLqrStates>;

struct WorkingPoint {
  double surge = 0.5;  // m/s, all other states zero
};

struct ContinuousModel {
  Eigen::Matrix<double, kReducedStates, kReducedStates> a;
  Eigen::Matrix<double, kReducedStates, kLqrInputs> b;
};

struct DiscreteModel {
  LqrA a;
  LqrB b;
};

/// Jacobian of C(nu) nu with respect to nu for a symmetric mass matrix.
Mat6 coriolis_jacobian(const Mat6& mass, const Vec6& nu);

/// Analytic Jacobians of the lag-free design model over [u, q, r, theta, psi]
/// and the three thruster commands at the working point.
ContinuousModel linearize(const PlantModel& design, const WorkingPoint& wp);

/// Zero-order-hold discretization of the reduced model plus integral rows
/// x_i[k+1] = x_i[k] + dt * e[k] for the u, theta and psi errors.
DiscreteModel discretize(const ContinuousModel& model, double dt);

DiscreteModel linearize_discretize(const PlantModel& design, const WorkingPoint& wp, double dt);

struct LqrSolution {
  Eigen::MatrixXd gain;      // K, inputs x states
  Eigen::MatrixXd riccati;   // P
  double residual = 0.0;     // ||DARE(P)||_F / max(1, ||P||_F)
  double spectral_radius = 0.0;  // rho(A - B K)
};

/// Stabilizing solution of the discrete algebraic Riccati equation by the
/// structure-preserving doubling algorithm.
/// Throws CrashSignal(kRiccatiFailure) when it does not converge.
Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& q, const Eigen::MatrixXd& r);

double dare_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                     const Eigen::MatrixXd& r, const Eigen::MatrixXd& p);

double spectral_radius(const Eigen::MatrixXd& m);

/// K = (R + B'PB)^-1 B'PA. Throws CrashSignal(kRiccatiFailure) when the
/// residual exceeds 1e-8 or the closed loop is not Schur stable.
LqrSolution lqr_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                     const Eigen::MatrixXd& r);

/// Q_LQR = diag[q1, q2, q2, q3, q3, q4, q5, q5].
Eigen::MatrixXd lqr_state_weights(const std::array<double, 5>& q);

struct ControllerConfig {
  std::array<double, 5> q{1.0, 1.0, 1.0, 0.01, 0.01};
  double deadband = 0.0;        // w_db, normalized thrust
  double rate = 10.0;           // Hz
  double integral_limit = 10.0;  // anti-windup box per channel
  WorkingPoint working_point{};
};

struct ControllerState {
  Vec3 integral = Vec3::Zero();     // u_i, theta_i, psi_i
  std::array<bool, 3> latch{};      // deadband hysteresis, per channel
};

struct ControlReference {
  double surge = 0.5;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Error state of the LQR for an estimate and references.
Eigen::Matrix<double, kLqrStates, 1> feedback_state(const VehicleState& estimate,
                                                    const ControlReference& ref,
                                                    const ControllerState& state);

/// u_lqr = -K x_fb saturated to [-1, 1]; the integrals then accumulate e dt
/// and are clamped to +-integral_limit.
std::pair<Vec3, ControllerState> control_step(const VehicleState& estimate,
                                              const ControlReference& ref,
                                              const ControllerState& state, const LqrGain& gain,
                                              double dt, double integral_limit = 10.0);

/// Deadband with hysteresis: an idle channel stays at zero until |u| > w_db,
/// an active one passes u until |u| < w_db / 2.
std::pair<double, bool> deadband_hysteresis(double u, double w_db, bool latch);

/// Per-episode controller: synthesizes K once from the design model and then
/// shapes every command through the deadband.
class Controller {
 public:
  Controller(const PlantModel& design, const ControllerConfig& cfg);

  ThrusterCommand update(const VehicleState& estimate, const ControlReference& ref);

  const LqrGain& gain() const { return gain_; }
  const LqrSolution& solution() const { return solution_; }
  const ControllerState& state() const { return state_; }
  double period() const { return 1.0 / cfg_.rate; }

 private:
  ControllerConfig cfg_;
  LqrSolution solution_;
  LqrGain gain_;
  ControllerState state_{};
};

}  // namespace auvtune
