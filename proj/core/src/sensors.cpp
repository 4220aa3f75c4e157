#include "auvtune/sensors.hpp"

#include <algorithm>

namespace auvtune {

void SensorConfig::validate() const {
  if (!(pressure_per_meter > 0.0)) throw ConfigError("sensors: k_p must be positive");
  if (!(sound_speed > 0.0)) throw ConfigError("sensors: sound speed must be positive");
  if (usbl_std < 0.0 || pressure_depth_std < 0.0 || ahrs_std < 0.0) {
    throw ConfigError("sensors: noise standard deviations must be non-negative");
  }
  if (!(usbl_rate > 0.0 && pressure_rate > 0.0 && ahrs_rate > 0.0)) {
    throw ConfigError("sensors: rates must be positive");
  }
}

Measurement sample_pressure(double true_depth, const SensorConfig& cfg, std::mt19937_64& rng,
                            double t) {
  Measurement m;
  m.kind = MeasurementKind::kPressure;
  m.value[0] = cfg.pressure_per_meter * true_depth + cfg.surface_pressure +
               cfg.pressure_std() * standard_normal(rng);
  m.valid_time = m.available_time = t;
  return m;
}

Measurement sample_usbl(const Vec3& true_position, double range, const SensorConfig& cfg,
                        std::mt19937_64& rng, double t) {
  Measurement m;
  m.kind = MeasurementKind::kUsbl;
  for (int i = 0; i < 3; ++i) m.value[i] = true_position[i] + cfg.usbl_std * standard_normal(rng);
  m.valid_time = t;
  m.available_time = t + 2.0 * std::max(range, 0.0) / cfg.sound_speed;
  return m;
}

Measurement sample_ahrs(const Vec3& true_attitude, const SensorConfig& cfg, std::mt19937_64& rng,
                        double t) {
  Measurement m;
  m.kind = MeasurementKind::kAhrs;
  for (int i = 0; i < 3; ++i) {
    m.value[i] = wrap_angle(true_attitude[i] + cfg.ahrs_std * standard_normal(rng));
  }
  m.valid_time = m.available_time = t;
  return m;
}

SensorSuite::SensorSuite(const SensorConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      usbl_rng_(make_stream(seed, 0x7573626cULL)),
      pressure_rng_(make_stream(seed, 0x70726573ULL)),
      ahrs_rng_(make_stream(seed, 0x61687273ULL)) {
  cfg_.validate();
}

Measurement SensorSuite::pressure(double true_depth, double t) {
  return sample_pressure(true_depth, cfg_, pressure_rng_, t);
}

Measurement SensorSuite::ahrs(const Vec3& true_attitude, double t) {
  return sample_ahrs(true_attitude, cfg_, ahrs_rng_, t);
}

void SensorSuite::trigger_usbl(const Vec3& true_position, double t) {
  const double range = (true_position - cfg_.usbl_origin).norm();
  Measurement m = sample_usbl(true_position, range, cfg_, usbl_rng_, t);
  // Keep the queue sorted by availability; equal times stay in trigger order.
  auto pos = std::upper_bound(pending_.begin(), pending_.end(), m.available_time,
                              [](double a, const Measurement& x) { return a < x.available_time; });
  pending_.insert(pos, m);
}

std::vector<Measurement> SensorSuite::release(double t) {
  std::vector<Measurement> out;
  while (!pending_.empty() && pending_.front().available_time <= t) {
    out.push_back(pending_.front());
    pending_.pop_front();
  }
  return out;
}

}  // namespace auvtune
