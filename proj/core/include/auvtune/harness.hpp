#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "auvtune/controller.hpp"
#include "auvtune/dynamics.hpp"
#include "auvtune/guidance.hpp"
#include "auvtune/params.hpp"
#include "auvtune/planner.hpp"
#include "auvtune/sensors.hpp"

namespace auvtune {

/// Random earth-frame current: a bias plus three slow sinusoids plus
/// first-order filtered noise, horizontally capped; heave is scaled down.
struct CurrentConfig {
  double cap = 0.15;              // m/s, horizontal magnitude limit
  double bias_max = 0.06;         // m/s, radius of the constant part
  double sinusoid_amplitude = 0.03;  // m/s, per component and sinusoid (upper bound)
  double period_min = 60.0;       // s
  double period_max = 600.0;      // s
  double noise_std = 0.02;        // m/s, stationary std of the filtered noise
  double noise_time_constant = 30.0;  // s
  double heave_ratio = 0.1;
  double knot_spacing = 1.0;      // s, noise interpolation grid

  void validate() const;
};

class CurrentProfile {
 public:
  CurrentProfile(const CurrentConfig& cfg, std::uint64_t seed);

  /// Earth-frame current (n, e, d components) at time t >= 0; continuous in t.
  Vec3 at(double t);

  const CurrentConfig& config() const { return cfg_; }

 private:
  void extend_to(std::size_t knot);

  CurrentConfig cfg_;
  std::mt19937_64 rng_;
  Vec3 bias_;
  std::array<Vec3, 3> amplitude_{};
  std::array<Vec3, 3> omega_{};
  std::array<Vec3, 3> phase_{};
  std::vector<Vec3> noise_;
};

struct WaypointConfig {
  int count = 6;
  Vec3 box_min{0.0, 0.0, 2.0};
  Vec3 box_max{60.0, 60.0, 12.0};
  double min_spacing = 12.0;  // m, horizontal distance between consecutive waypoints
  double glide_margin = 0.6;  // consecutive legs use at most this fraction of the glide limit
  int max_draws = 10000;

  void validate() const;
};

/// Waypoints drawn uniformly in the box, each leg redrawn until it is at
/// least min_spacing long and its straight-line slope respects the glide
/// limit with margin.
std::vector<Waypoint> generate_waypoints(const WaypointConfig& cfg, double glide_max,
                                         std::uint64_t seed);

enum class CostVariant { kOriginal, kQuadratic };

std::string_view to_string(CostVariant v);
CostVariant parse_cost_variant(std::string_view text);

struct InitialUncertainty {
  double position_std = 0.5;    // m
  double attitude_std = 0.02;   // rad
  double velocity_std = 0.05;   // m/s and rad/s
  double current_std = 0.1;     // m/s
};

struct ScenarioConfig {
  HydroParams nominal = default_hydro_params();
  MismatchConfig mismatch{};
  CurrentConfig current{};
  SensorConfig sensors{};
  WaypointConfig waypoints{};
  GuidanceConfig guidance{};
  ControllerConfig controller{};  // rate, integral limit; q/w_db come from GncParams
  InitialUncertainty initial{};
  double base_rate = 100.0;  // Hz, plant, AHRS and filter prediction
  double g_max = 1.5;        // m
  double r_plan_max = 10.0;  // m
  double t_max_factor = 3.0;  // T_max = factor * nominal traversal time
  double arrival_radius = 1.0;  // m
  CostVariant cost = CostVariant::kOriginal;
  std::uint64_t seed = 1;

  void validate() const;
};

/// One 10 Hz trace row; the command is the one held until the next row.
struct TraceSample {
  double t = 0.0;
  VehicleState truth;
  VehicleState estimate;
  Vec3 current = Vec3::Zero();
  double s = 0.0;  // truth projection arclength
  PathSample reference;
  double cross_track = 0.0;  // truth, positive to starboard
  double depth_error = 0.0;  // truth, d - d_ref
  ControlReference command_ref;
  ThrusterCommand command;
};

struct Trace {
  std::vector<TraceSample> samples;
  double t_end = 0.0;
  bool complete = false;
};

/// Invocation counts of the multi-rate loop.
struct RateCounts {
  long plant = 0;
  long ahrs = 0;
  long pressure = 0;
  long usbl_triggered = 0;
  long usbl_applied = 0;
  long controller = 0;
  long predict = 0;
};

struct EpisodeResult {
  GncParams params;
  std::uint64_t seed = 0;
  double j = 0.0;  // NaN when l == 0
  double g = 0.0;  // NaN when l == 0
  bool l = false;
  CrashReason reason = CrashReason::kNone;
  std::string message;
  double t_end = 0.0;
  double path_length = 0.0;
  RateCounts counts;
  Trace trace;
};

/// Closed-loop simulation of one scenario. Crashes are reported through
/// l = 0 and reason; invalid configuration throws ConfigError.
EpisodeResult run_episode(const GncParams& a, const ScenarioConfig& cfg);

/// j = T_end + sum over the three commands of the exact integral of the
/// piecewise-constant power model. Throws ConfigError on an incomplete trace.
double energy_cost(const Trace& trace, CostVariant variant);

/// Power model of one command value.
double command_power(double u, CostVariant variant);

/// Largest 3-D distance between truth and its projection on the reference.
double max_deviation(const Trace& trace);

struct Aggregate {
  double j = 0.0;
  double g = 0.0;
  bool l = false;
};

/// Mean j, max g and conjunction of l over seeds.
Aggregate robust_aggregate(const std::vector<EpisodeResult>& results);

/// Columnar CSV of a trace.
void write_trace_csv(const Trace& trace, std::ostream& out);

/// {params, seed, j, g, l, reason, T_end}; j and g are null when l == 0.
nlohmann::json to_json(const EpisodeResult& r);

}  // namespace auvtune
