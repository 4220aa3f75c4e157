#include "auvtune/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

namespace auvtune {

namespace {

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return s;
}

// Reduced coordinates inside the 6-DOF body velocity and the attitude.
constexpr std::array<int, 3> kNuRows{0, 4, 5};  // u, q, r

}  // namespace

Mat6 coriolis_jacobian(const Mat6& mass, const Vec6& nu) {
  // C(nu) nu = [-a1 x w; -a1 x v - a2 x w] with a1 = P1 nu, a2 = P2 nu.
  const Vec3 v = nu.head<3>();
  const Vec3 w = nu.tail<3>();
  const Eigen::Matrix<double, 3, 6> p1 = mass.topRows<3>();
  const Eigen::Matrix<double, 3, 6> p2 = mass.bottomRows<3>();
  const Vec3 a1 = p1 * nu;
  const Vec3 a2 = p2 * nu;
  Eigen::Matrix<double, 3, 6> ev = Eigen::Matrix<double, 3, 6>::Zero();
  Eigen::Matrix<double, 3, 6> ew = Eigen::Matrix<double, 3, 6>::Zero();
  ev.leftCols<3>().setIdentity();
  ew.rightCols<3>().setIdentity();
  Mat6 j;
  j.topRows<3>() = skew(w) * p1 - skew(a1) * ew;
  j.bottomRows<3>() = skew(v) * p1 - skew(a1) * ev + skew(w) * p2 - skew(a2) * ew;
  return j;
}

ContinuousModel linearize(const PlantModel& design, const WorkingPoint& wp) {
  const HydroParams& hp = design.params();
  Vec6 nu = Vec6::Zero();
  nu[0] = wp.surge;
  const double phi = 0.0;
  const double theta = 0.0;

  const Mat6 force_jac = -coriolis_jacobian(hp.rigid_body_mass, nu) -
                         coriolis_jacobian(hp.added_mass, nu) -
                         Mat6(hp.drag.diagonal().asDiagonal());
  const Mat6 m_inv = design.total_mass().inverse();
  const Mat6 acc_nu = m_inv * force_jac;

  // d g / d theta
  const RestoringConfig& rc = hp.restoring;
  const double wb = rc.weight - rc.buoyancy;
  const Vec3 arm = rc.weight * rc.center_of_gravity - rc.buoyancy * rc.center_of_buoyancy;
  const double sphi = std::sin(phi), cphi = std::cos(phi);
  const double sth = std::sin(theta), cth = std::cos(theta);
  Vec6 dg_dtheta;
  dg_dtheta << wb * cth, wb * sth * sphi, wb * sth * cphi,
      arm.y() * sth * cphi - arm.z() * sth * sphi, arm.z() * cth - arm.x() * sth * cphi,
      arm.x() * sth * sphi - arm.y() * cth;
  const Vec6 acc_theta = -m_inv * dg_dtheta;
  const Eigen::Matrix<double, 6, 3> acc_cmd = m_inv * design.command_allocation();

  ContinuousModel out;
  out.a.setZero();
  out.b.setZero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.a(i, j) = acc_nu(kNuRows[i], kNuRows[j]);
    out.a(i, 3) = acc_theta[kNuRows[i]];
    out.a(i, 4) = 0.0;  // restoring forces do not depend on yaw
    out.b.row(i) = acc_cmd.row(kNuRows[i]);
  }
  // theta_dot = q cos(phi) - r sin(phi); psi_dot = (q sin(phi) + r cos(phi)) / cos(theta)
  const double q = nu[4], r = nu[5];
  out.a(3, 1) = cphi;
  out.a(3, 2) = -sphi;
  out.a(4, 1) = sphi / cth;
  out.a(4, 2) = cphi / cth;
  out.a(4, 3) = (q * sphi + r * cphi) * sth / (cth * cth);
  return out;
}

DiscreteModel discretize(const ContinuousModel& model, double dt) {
  if (!(dt > 0.0)) throw ConfigError("controller period must be positive");
  constexpr int n = kReducedStates;
  constexpr int m = kLqrInputs;
  Eigen::Matrix<double, n + m, n + m> block = Eigen::Matrix<double, n + m, n + m>::Zero();
  block.topLeftCorner<n, n>() = model.a * dt;
  block.topRightCorner<n, m>() = model.b * dt;
  const Eigen::Matrix<double, n + m, n + m> phi = block.exp();

  DiscreteModel out;
  out.a.setZero();
  out.b.setZero();
  out.a.topLeftCorner<n, n>() = phi.topLeftCorner<n, n>();
  out.b.topRows<n>() = phi.topRightCorner<n, m>();
  // Integral rows accumulate the u, theta and psi errors.
  out.a(5, 0) = dt;
  out.a(6, 3) = dt;
  out.a(7, 4) = dt;
  out.a.bottomRightCorner<3, 3>().setIdentity();
  return out;
}

DiscreteModel linearize_discretize(const PlantModel& design, const WorkingPoint& wp, double dt) {
  return discretize(linearize(design, wp), dt);
}

double dare_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                     const Eigen::MatrixXd& r, const Eigen::MatrixXd& p) {
  const Eigen::MatrixXd bt_p = b.transpose() * p;
  const Eigen::MatrixXd s = r + bt_p * b;
  const Eigen::MatrixXd res = a.transpose() * p * a - p -
                              (bt_p * a).transpose() * s.ldlt().solve(bt_p * a) + q;
  return res.norm() / std::max(1.0, p.norm());
}

double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& q, const Eigen::MatrixXd& r) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != b.cols() ||
      r.cols() != b.cols()) {
    throw ConfigError("DARE: inconsistent matrix dimensions");
  }
  auto r_llt = r.llt();
  if (r_llt.info() != Eigen::Success) {
    throw CrashSignal(CrashReason::kRiccatiFailure, "DARE: R is not positive definite");
  }
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd ak = a;
  Eigen::MatrixXd gk = b * r_llt.solve(b.transpose());
  Eigen::MatrixXd hk = 0.5 * (q + q.transpose());

  constexpr int kMaxIterations = 200;
  for (int it = 0; it < kMaxIterations; ++it) {
    Eigen::PartialPivLU<Eigen::MatrixXd> w(eye + gk * hk);
    const Eigen::MatrixXd w_a = w.solve(ak);
    const Eigen::MatrixXd w_g = w.solve(gk);
    const Eigen::MatrixXd h_next = hk + ak.transpose() * hk * w_a;
    gk = gk + ak * w_g * ak.transpose();
    ak = ak * w_a;
    const double change = (h_next - hk).norm();
    hk = 0.5 * (h_next + h_next.transpose());
    if (!hk.allFinite()) break;
    if (change <= 1e-15 * std::max(1.0, hk.norm())) {
      return hk;
    }
  }
  throw CrashSignal(CrashReason::kRiccatiFailure, "DARE: doubling iteration did not converge");
}

LqrSolution lqr_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                     const Eigen::MatrixXd& r) {
  LqrSolution sol;
  sol.riccati = solve_dare(a, b, q, r);
  const Eigen::MatrixXd bt_p = b.transpose() * sol.riccati;
  sol.gain = (r + bt_p * b).ldlt().solve(bt_p * a);
  sol.residual = dare_residual(a, b, q, r, sol.riccati);
  sol.spectral_radius = spectral_radius(a - b * sol.gain);
  if (!sol.gain.allFinite() || !(sol.residual < 1e-8)) {
    throw CrashSignal(CrashReason::kRiccatiFailure, "DARE residual too large");
  }
  if (!(sol.spectral_radius < 1.0)) {
    throw CrashSignal(CrashReason::kRiccatiFailure, "LQR closed loop is not stable");
  }
  return sol;
}

Eigen::MatrixXd lqr_state_weights(const std::array<double, 5>& q) {
  Eigen::VectorXd d(kLqrStates);
  d << q[0], q[1], q[1], q[2], q[2], q[3], q[4], q[4];
  return d.asDiagonal();
}

Eigen::Matrix<double, kLqrStates, 1> feedback_state(const VehicleState& est,
                                                    const ControlReference& ref,
                                                    const ControllerState& state) {
  Eigen::Matrix<double, kLqrStates, 1> x;
  x << est.nu[0] - ref.surge, est.nu[4], est.nu[5], wrap_angle(est.eta[4] - ref.pitch),
      wrap_angle(est.eta[5] - ref.yaw), state.integral;
  return x;
}

std::pair<Vec3, ControllerState> control_step(const VehicleState& estimate,
                                              const ControlReference& ref,
                                              const ControllerState& state, const LqrGain& gain,
                                              double dt, double integral_limit) {
  const auto x = feedback_state(estimate, ref, state);
  Vec3 u = -(gain * x);
  for (int i = 0; i < 3; ++i) u[i] = std::clamp(u[i], -1.0, 1.0);

  ControllerState next = state;
  const Vec3 error(x[0], x[3], x[4]);
  for (int i = 0; i < 3; ++i) {
    next.integral[i] = std::clamp(state.integral[i] + error[i] * dt, -integral_limit, integral_limit);
  }
  return {u, next};
}

std::pair<double, bool> deadband_hysteresis(double u, double w_db, bool latch) {
  if (latch) {
    if (std::abs(u) < 0.5 * w_db) return {0.0, false};
    return {u, true};
  }
  if (std::abs(u) > w_db) return {u, true};
  return {0.0, false};
}

Controller::Controller(const PlantModel& design, const ControllerConfig& cfg) : cfg_(cfg) {
  for (double qi : cfg.q) {
    if (!(qi > 0.0) || !std::isfinite(qi)) throw ConfigError("LQR weights must be positive");
  }
  if (cfg.deadband < 0.0) throw ConfigError("deadband width must be non-negative");
  const DiscreteModel model = linearize_discretize(design, cfg.working_point, period());
  solution_ = lqr_gain(model.a, model.b, lqr_state_weights(cfg.q),
                       Eigen::MatrixXd::Identity(kLqrInputs, kLqrInputs));
  gain_ = solution_.gain;
}

ThrusterCommand Controller::update(const VehicleState& estimate, const ControlReference& ref) {
  auto [u, next] = control_step(estimate, ref, state_, gain_, period(), cfg_.integral_limit);
  for (int i = 0; i < 3; ++i) {
    auto [shaped, latch] = deadband_hysteresis(u[i], cfg_.deadband, next.latch[i]);
    u[i] = shaped;
    next.latch[i] = latch;
  }
  state_ = next;
  return ThrusterCommand::from_vector(u);
}

}  // namespace auvtune
