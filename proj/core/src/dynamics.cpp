#include "auvtune/dynamics.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

namespace auvtune {

namespace {

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return s;
}

using Derivative = StateDerivative;

struct FullState {
  VehicleState vehicle;
  std::array<double, kThrusterCount> thrust;
};

FullState axpy(const FullState& x, double h, const Derivative& dx,
               const std::array<double, kThrusterCount>& dthrust) {
  FullState out = x;
  out.vehicle.nu += h * dx.head<6>();
  out.vehicle.eta += h * dx.tail<6>();
  for (int i = 0; i < kThrusterCount; ++i) out.thrust[i] += h * dthrust[i];
  return out;
}

std::array<double, kThrusterCount> thruster_targets(const ThrusterCommand& cmd) {
  auto sat = [](double c) { return std::clamp(c, -1.0, 1.0); };
  return {sat(cmd.surge), sat(cmd.rl), sat(cmd.rl), sat(cmd.ud), sat(cmd.ud)};
}

Vec6 kinematics(const VehicleState& s) {
  const Vec3 att = s.attitude();
  Vec6 eta_dot;
  eta_dot.head<3>() = rotation_body_to_earth(att) * s.nu.head<3>();
  eta_dot.tail<3>() = euler_rate_transform(att) * s.nu.tail<3>();
  return eta_dot;
}

void wrap_attitude(VehicleState& s) {
  for (int i = 3; i < 6; ++i) s.eta[i] = wrap_angle(s.eta[i]);
}

}  // namespace

void HydroParams::validate() const {
  const Mat6 m = rigid_body_mass + added_mass;
  if (!m.allFinite()) throw ConfigError("mass matrices contain non-finite entries");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw ConfigError("M_RB + M_A is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat6> eig(m);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw ConfigError("M_RB + M_A is not positive definite");
  }
  const Vec6 d = drag.diagonal();
  if (!(d.array() > 0.0).all() || !d.allFinite()) {
    throw ConfigError("drag coefficients must be positive");
  }
  if (!(thruster_time_constant > 0.0)) throw ConfigError("thruster time constant must be positive");
  for (int i = 0; i < kThrusterCount; ++i) {
    if (!(thruster_gain[i] > 0.0)) throw ConfigError("thruster static gains must be positive");
    if (!(thrusters.max_force[i] > 0.0)) throw ConfigError("thruster max force must be positive");
    if (thrusters.direction[i].norm() < 1e-12) throw ConfigError("thruster direction is zero");
  }
}

Mat6 rigid_body_mass_matrix(double mass, const Vec3& inertia, const Vec3& cg) {
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = mass * Mat3::Identity();
  m.topRightCorner<3, 3>() = -mass * skew(cg);
  m.bottomLeftCorner<3, 3>() = mass * skew(cg);
  // Parallel-axis shift of the inertia about the body origin.
  m.bottomRightCorner<3, 3>() =
      inertia.asDiagonal().toDenseMatrix() - mass * skew(cg) * skew(cg);
  return m;
}

Mat6 coriolis_matrix(const Mat6& mass, const Vec6& nu) {
  const Vec3 v = nu.head<3>();
  const Vec3 w = nu.tail<3>();
  const Vec3 a1 = mass.topLeftCorner<3, 3>() * v + mass.topRightCorner<3, 3>() * w;
  const Vec3 a2 = mass.bottomLeftCorner<3, 3>() * v + mass.bottomRightCorner<3, 3>() * w;
  Mat6 c = Mat6::Zero();
  c.topRightCorner<3, 3>() = -skew(a1);
  c.bottomLeftCorner<3, 3>() = -skew(a1);
  c.bottomRightCorner<3, 3>() = -skew(a2);
  return c;
}

Vec6 coriolis_product(const Mat6& mass, const Vec6& nu) {
  const Vec3 v = nu.head<3>();
  const Vec3 w = nu.tail<3>();
  const Vec3 a1 = mass.topRows<3>() * nu;
  const Vec3 a2 = mass.bottomRows<3>() * nu;
  Vec6 out;
  out.head<3>() = -a1.cross(w);
  out.tail<3>() = -a1.cross(v) - a2.cross(w);
  return out;
}

Eigen::Matrix3d rotation_body_to_earth(const Vec3& att) {
  return (Eigen::AngleAxisd(att[2], Vec3::UnitZ()) * Eigen::AngleAxisd(att[1], Vec3::UnitY()) *
          Eigen::AngleAxisd(att[0], Vec3::UnitX()))
      .toRotationMatrix();
}

Eigen::Matrix3d euler_rate_transform(const Vec3& att) {
  const double sphi = std::sin(att[0]);
  const double cphi = std::cos(att[0]);
  const double cth = std::cos(att[1]);
  const double tth = std::tan(att[1]);
  Mat3 t;
  t << 1.0, sphi * tth, cphi * tth, 0.0, cphi, -sphi, 0.0, sphi / cth, cphi / cth;
  return t;
}

Vec6 restoring_forces(const RestoringConfig& rc, const Vec3& att) {
  const double sphi = std::sin(att[0]);
  const double cphi = std::cos(att[0]);
  const double sth = std::sin(att[1]);
  const double cth = std::cos(att[1]);
  const double wb = rc.weight - rc.buoyancy;
  const Vec3 moment_arm = rc.weight * rc.center_of_gravity - rc.buoyancy * rc.center_of_buoyancy;
  Vec6 g;
  g << wb * sth, -wb * cth * sphi, -wb * cth * cphi,
      -moment_arm.y() * cth * cphi + moment_arm.z() * cth * sphi,
      moment_arm.z() * sth + moment_arm.x() * cth * cphi,
      -moment_arm.x() * cth * sphi - moment_arm.y() * sth;
  return g;
}

PlantModel::PlantModel(HydroParams params) : params_(std::move(params)) {
  params_.validate();
  total_mass_ = params_.rigid_body_mass + params_.added_mass;
  mass_factor_.compute(total_mass_);
  if (mass_factor_.info() != Eigen::Success) throw ConfigError("singular mass matrix");
  mass_inverse_ = mass_factor_.solve(Mat6::Identity());
  drag_ = params_.drag.diagonal();

  const auto& geo = params_.thrusters;
  for (int i = 0; i < kThrusterCount; ++i) {
    const Vec3 dir = geo.direction[i].normalized();
    const double f = geo.max_force[i] * params_.thruster_gain[i];
    allocation_.col(i).head<3>() = f * dir;
    allocation_.col(i).tail<3>() = f * geo.position[i].cross(dir);
  }
  command_allocation_.col(0) = allocation_.col(kSurge);
  command_allocation_.col(1) = allocation_.col(kRlUpper) + allocation_.col(kRlLower);
  command_allocation_.col(2) = allocation_.col(kUdPort) + allocation_.col(kUdStarboard);
}

Vec6 PlantModel::acceleration(const Vec6& nu, const Vec3& attitude, const Vec3& current_body,
                              const Vec3& current_body_rate, const Vec6& tau) const {
  Vec6 nu_r = nu;
  nu_r.head<3>() -= current_body;
  Vec6 current_rate = Vec6::Zero();
  current_rate.head<3>() = current_body_rate;

  // (M_RB + M_A) nu_dot = tau - C_RB(nu) nu - C_A(nu_r) nu_r - D nu_r - g + M_A nu_c_dot
  const Vec6 rhs = tau - coriolis_product(params_.rigid_body_mass, nu) -
                   coriolis_product(params_.added_mass, nu_r) - drag_.cwiseProduct(nu_r) -
                   restoring_forces(params_.restoring, attitude) +
                   params_.added_mass * current_rate;
  return mass_inverse_ * rhs;
}

Vec6 thruster_forces(const ThrusterState& thr, const PlantModel& model) {
  Eigen::Matrix<double, kThrusterCount, 1> f;
  for (int i = 0; i < kThrusterCount; ++i) f[i] = thr.thrust[i];
  return model.allocation() * f;
}

StateDerivative derivative(const VehicleState& state, const ThrusterState& thr,
                           const Vec3& current_earth, const PlantModel& model) {
  if (!state.finite() || !current_earth.allFinite()) {
    throw CrashSignal(CrashReason::kNumericalDivergence, "non-finite state in plant derivative");
  }
  const Vec3 att = state.attitude();
  const Vec3 omega = state.nu.tail<3>();
  const Vec3 current_body = rotation_body_to_earth(att).transpose() * current_earth;
  // A current fixed in the earth frame rotates as seen from the body.
  const Vec3 current_body_rate = -omega.cross(current_body);
  StateDerivative dx;
  dx.head<6>() = model.acceleration(state.nu, att, current_body, current_body_rate,
                                    thruster_forces(thr, model));
  dx.tail<6>() = kinematics(state);
  return dx;
}

StateDerivative design_derivative(const VehicleState& state, const ThrusterCommand& cmd,
                                  const Vec3& current_body, const PlantModel& model) {
  const Vec6 tau = model.command_allocation() * cmd.as_vector();
  StateDerivative dx;
  dx.head<6>() = model.acceleration(state.nu, state.attitude(), current_body, Vec3::Zero(), tau);
  dx.tail<6>() = kinematics(state);
  return dx;
}

StepResult step(const VehicleState& state, const ThrusterState& thr, const ThrusterCommand& cmd,
                const Vec3& current_earth, const PlantModel& model, double dt) {
  if (!(dt > 0.0)) throw ConfigError("step size must be positive");
  const auto target = thruster_targets(cmd);
  const double tau_t = model.params().thruster_time_constant;

  auto f = [&](const FullState& x, std::array<double, kThrusterCount>& dthrust) {
    ThrusterState ts;
    ts.thrust = x.thrust;
    for (int i = 0; i < kThrusterCount; ++i) dthrust[i] = (target[i] - x.thrust[i]) / tau_t;
    return derivative(x.vehicle, ts, current_earth, model);
  };

  const FullState x0{state, thr.thrust};
  std::array<double, kThrusterCount> t1, t2, t3, t4;
  const Derivative k1 = f(x0, t1);
  const Derivative k2 = f(axpy(x0, 0.5 * dt, k1, t1), t2);
  const Derivative k3 = f(axpy(x0, 0.5 * dt, k2, t2), t3);
  const Derivative k4 = f(axpy(x0, dt, k3, t3), t4);

  StepResult out;
  out.state = state;
  out.state.nu += dt / 6.0 * (k1.head<6>() + 2.0 * k2.head<6>() + 2.0 * k3.head<6>() + k4.head<6>());
  out.state.eta +=
      dt / 6.0 * (k1.tail<6>() + 2.0 * k2.tail<6>() + 2.0 * k3.tail<6>() + k4.tail<6>());
  out.thrusters.command = cmd;
  for (int i = 0; i < kThrusterCount; ++i) {
    out.thrusters.thrust[i] = thr.thrust[i] + dt / 6.0 * (t1[i] + 2.0 * t2[i] + 2.0 * t3[i] + t4[i]);
  }
  if (!out.state.finite()) {
    throw CrashSignal(CrashReason::kNumericalDivergence, "plant state diverged");
  }
  wrap_attitude(out.state);
  return out;
}

VehicleState design_step(const VehicleState& state, const ThrusterCommand& cmd,
                         const Vec3& current_body, const PlantModel& model, double dt) {
  auto f = [&](const VehicleState& s) { return design_derivative(s, cmd, current_body, model); };
  auto shifted = [&](double h, const Derivative& d) {
    VehicleState s = state;
    s.nu += h * d.head<6>();
    s.eta += h * d.tail<6>();
    return s;
  };
  const Derivative k1 = f(state);
  const Derivative k2 = f(shifted(0.5 * dt, k1));
  const Derivative k3 = f(shifted(0.5 * dt, k2));
  const Derivative k4 = f(shifted(dt, k3));
  VehicleState out = shifted(dt / 6.0, k1 + 2.0 * k2 + 2.0 * k3 + k4);
  wrap_attitude(out);
  return out;
}

HydroParams perturb_params(const HydroParams& nominal, std::uint64_t seed,
                           const MismatchConfig& mismatch) {
  constexpr int kMaxDraws = 100;
  constexpr double kMinFactor = 0.05;
  auto rng = make_stream(seed, 0x6d69736d61746368ULL);  // "mismatch"

  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    auto factor = [&](double rel_std) { return 1.0 + rel_std * standard_normal(rng); };
    HydroParams p = nominal;

    const double f_d1 = factor(mismatch.drag_rel_std);
    const double f_d2 = factor(mismatch.drag_rel_std);
    const double f_d4 = factor(mismatch.drag_rel_std);
    const double f_d5 = factor(mismatch.drag_rel_std);
    const double f_mass = factor(mismatch.mass_rel_std);
    Vec6 f_added;
    for (int i = 0; i < 6; ++i) f_added[i] = factor(mismatch.added_mass_rel_std);
    std::array<double, kThrusterCount> f_gain{};
    for (auto& g : f_gain) g = factor(mismatch.thruster_gain_rel_std);

    bool ok = std::min({f_d1, f_d2, f_d4, f_d5, f_mass}) > kMinFactor &&
              f_added.minCoeff() > kMinFactor &&
              *std::min_element(f_gain.begin(), f_gain.end()) > kMinFactor;
    if (!ok) continue;

    p.drag.surge *= f_d1;
    p.drag.sway_heave *= f_d2;
    p.drag.roll *= f_d4;
    p.drag.pitch_yaw *= f_d5;
    p.rigid_body_mass *= f_mass;
    const Vec6 s = f_added.cwiseSqrt();
    p.added_mass = s.asDiagonal() * nominal.added_mass * s.asDiagonal();
    for (int i = 0; i < kThrusterCount; ++i) p.thruster_gain[i] *= f_gain[i];

    try {
      p.validate();
    } catch (const ConfigError&) {
      continue;
    }
    return p;
  }
  std::ostringstream msg;
  msg << "no valid mismatch draw for seed " << seed << " after " << kMaxDraws << " attempts";
  throw ConfigError(msg.str());
}

HydroParams default_hydro_params() {
  HydroParams p;
  const double mass = 15.0;
  p.rigid_body_mass = rigid_body_mass_matrix(mass, Vec3(0.06, 0.35, 0.35), Vec3::Zero());
  Vec6 added;
  added << 1.5, 9.0, 9.0, 0.006, 0.1, 0.1;
  p.added_mass = added.asDiagonal();
  p.drag = DragCoefficients{10.0, 40.0, 0.5, 2.0};
  p.restoring.weight = mass * 9.80665;
  p.restoring.buoyancy = p.restoring.weight;
  p.restoring.center_of_gravity = Vec3::Zero();
  p.restoring.center_of_buoyancy = Vec3(0.0, 0.0, -0.005);

  auto& geo = p.thrusters;
  geo.position[kSurge] = Vec3(-0.25, 0.0, 0.0);
  geo.direction[kSurge] = Vec3::UnitX();
  geo.max_force[kSurge] = 9.0;
  geo.position[kRlUpper] = Vec3(-0.2, 0.0, -0.05);
  geo.position[kRlLower] = Vec3(-0.2, 0.0, 0.05);
  geo.direction[kRlUpper] = geo.direction[kRlLower] = Vec3::UnitY();
  geo.position[kUdPort] = Vec3(-0.2, -0.05, 0.0);
  geo.position[kUdStarboard] = Vec3(-0.2, 0.05, 0.0);
  geo.direction[kUdPort] = geo.direction[kUdStarboard] = Vec3::UnitZ();
  for (int i = 1; i < kThrusterCount; ++i) geo.max_force[i] = 1.0;
  p.thruster_time_constant = 0.2;
  p.thruster_gain.fill(1.0);
  return p;
}

}  // namespace auvtune
