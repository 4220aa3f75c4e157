#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "auvtune/common.hpp"

namespace auvtune {

enum class MeasurementKind { kUsbl, kPressure, kAhrs };

struct Measurement {
  MeasurementKind kind = MeasurementKind::kPressure;
  Vec3 value = Vec3::Zero();  // pressure uses value[0]
  double valid_time = 0.0;
  double available_time = 0.0;

  int dimension() const { return kind == MeasurementKind::kPressure ? 1 : 3; }
};

struct SensorConfig {
  double usbl_std = 0.3;              // m per axis
  double pressure_depth_std = 0.05;   // m of water column
  double ahrs_std = deg2rad(0.5);     // rad per axis
  double pressure_per_meter = 9.80665;  // k_p, kPa/m
  double surface_pressure = 101.325;    // p0, kPa
  double sound_speed = 1500.0;          // m/s
  Vec3 usbl_origin = Vec3::Zero();      // transceiver position (n, e, d)
  double usbl_rate = 1.0;               // Hz
  double pressure_rate = 10.0;          // Hz
  double ahrs_rate = 100.0;             // Hz

  double pressure_std() const { return pressure_per_meter * pressure_depth_std; }
  void validate() const;
};

/// value = k_p d + p0 + noise.
Measurement sample_pressure(double true_depth, const SensorConfig& cfg, std::mt19937_64& rng,
                            double t);

/// Position plus noise, available after the two-way acoustic travel time.
Measurement sample_usbl(const Vec3& true_position, double range, const SensorConfig& cfg,
                        std::mt19937_64& rng, double t);

/// Attitude plus noise, wrapped to (-pi, pi].
Measurement sample_ahrs(const Vec3& true_attitude, const SensorConfig& cfg, std::mt19937_64& rng,
                        double t);

/// Per-episode sensor bank with one isolated noise stream per sensor and a
/// queue that releases delayed measurements at their availability time.
class SensorSuite {
 public:
  SensorSuite(const SensorConfig& cfg, std::uint64_t seed);

  const SensorConfig& config() const { return cfg_; }

  Measurement pressure(double true_depth, double t);
  Measurement ahrs(const Vec3& true_attitude, double t);
  /// Samples the USBL and stores it until it becomes available.
  void trigger_usbl(const Vec3& true_position, double t);
  /// Pops every pending measurement with available_time <= t, in order of
  /// availability (ties keep trigger order).
  std::vector<Measurement> release(double t);

 private:
  SensorConfig cfg_;
  std::mt19937_64 usbl_rng_;
  std::mt19937_64 pressure_rng_;
  std::mt19937_64 ahrs_rng_;
  std::deque<Measurement> pending_;
};

}  // namespace auvtune
