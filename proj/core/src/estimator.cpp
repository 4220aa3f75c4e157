#include "auvtune/estimator.hpp"

namespace auvtune {

namespace fi = filter_index;

FilterNoiseConfig FilterNoiseConfig::from_sensors(const SensorConfig& sensors,
                                                  std::array<double, 4> alpha) {
  FilterNoiseConfig cfg;
  cfg.alpha = alpha;
  cfg.usbl_var = sensors.usbl_std * sensors.usbl_std;
  cfg.pressure_var = sensors.pressure_std() * sensors.pressure_std();
  cfg.ahrs_var = sensors.ahrs_std * sensors.ahrs_std;
  return cfg;
}

FilterMatrix build_process_noise(const std::array<double, 4>& alpha) {
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw ConfigError("process noise parameters must be positive and finite");
    }
  }
  Vec6 q_nu;
  q_nu << alpha[1], alpha[1], alpha[1], alpha[1] * alpha[2], alpha[1] * alpha[2],
      alpha[1] * alpha[2];
  FilterVector diag;
  diag << q_nu, alpha[3] * q_nu, alpha[0], alpha[0];
  return diag.asDiagonal();
}

VehicleState vehicle_state_of(const FilterVector& mean) {
  VehicleState s;
  s.nu = mean.segment<6>(fi::kU);
  s.eta = mean.segment<6>(fi::kN);
  return s;
}

FilterVector filter_state_of(const VehicleState& state, double current_u, double current_v) {
  FilterVector x;
  x << state.nu, state.eta, current_u, current_v;
  return x;
}

Belief predict(const Belief& belief, const ThrusterCommand& cmd, double dt, const FilterMatrix& q,
               const PlantModel& design, const ukf::Scaling& scaling) {
  if (!(dt > 0.0)) throw ConfigError("filter step must be positive");
  auto process = [&](const FilterVector& x) {
    // Heave current is not part of the filter model.
    const Vec3 current_body(x[fi::kCurrentU], x[fi::kCurrentV], 0.0);
    const VehicleState next = design_step(vehicle_state_of(x), cmd, current_body, design, dt);
    return filter_state_of(next, x[fi::kCurrentU], x[fi::kCurrentV]);
  };
  const FilterMatrix q_dt = q * dt;
  return ukf::predict<kFilterStates>(belief, process, q_dt, scaling, kFilterAngles);
}

Belief correct(const Belief& belief, const Measurement& meas, const FilterNoiseConfig& noise,
               const SensorConfig& sensors, const ukf::Scaling& scaling) {
  static constexpr std::array<int, 3> kAllAngles{0, 1, 2};
  switch (meas.kind) {
    case MeasurementKind::kUsbl: {
      auto h = [](const FilterVector& x) { return Vec3(x.segment<3>(fi::kN)); };
      const Mat3 r = noise.usbl_var * Mat3::Identity();
      return ukf::correct<kFilterStates, 3>(belief, meas.value, h, r, scaling, kFilterAngles, {});
    }
    case MeasurementKind::kPressure: {
      const double kp = sensors.pressure_per_meter;
      const double p0 = sensors.surface_pressure;
      auto h = [kp, p0](const FilterVector& x) {
        return Eigen::Matrix<double, 1, 1>(kp * x[fi::kD] + p0);
      };
      const Eigen::Matrix<double, 1, 1> z(meas.value[0]);
      const Eigen::Matrix<double, 1, 1> r(noise.pressure_var);
      return ukf::correct<kFilterStates, 1>(belief, z, h, r, scaling, kFilterAngles, {});
    }
    case MeasurementKind::kAhrs: {
      auto h = [](const FilterVector& x) { return Vec3(x.segment<3>(fi::kPhi)); };
      const Mat3 r = noise.ahrs_var * Mat3::Identity();
      return ukf::correct<kFilterStates, 3>(belief, meas.value, h, r, scaling, kFilterAngles,
                                            kAllAngles);
    }
  }
  throw ConfigError("unknown measurement kind");
}

NavigationFilter::NavigationFilter(const PlantModel& design, const FilterNoiseConfig& noise,
                                   const SensorConfig& sensors, Belief initial,
                                   ukf::Scaling scaling)
    : design_(&design),
      noise_(noise),
      sensors_(sensors),
      q_(build_process_noise(noise.alpha)),
      scaling_(scaling),
      belief_(std::move(initial)) {}

void NavigationFilter::predict(const ThrusterCommand& cmd, double dt) {
  belief_ = auvtune::predict(belief_, cmd, dt, q_, *design_, scaling_);
}

void NavigationFilter::correct(const Measurement& meas) {
  belief_ = auvtune::correct(belief_, meas, noise_, sensors_, scaling_);
}

}  // namespace auvtune
