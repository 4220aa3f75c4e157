#include "auvtune/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include <nlohmann/json.hpp>

#include "auvtune/estimator.hpp"

namespace auvtune {

namespace {

constexpr std::uint64_t kCurrentStream = 0x63757272656e74ULL;   // "current"
constexpr std::uint64_t kWaypointStream = 0x776179706f696eULL;  // "waypoin"
constexpr std::uint64_t kInitialStream = 0x696e697469616cULL;   // "initial"

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int stride_of(double base_rate, double rate, const char* what) {
  if (!(rate > 0.0) || rate > base_rate) {
    throw ConfigError(std::string(what) + " rate must be in (0, base rate]");
  }
  const double ratio = base_rate / rate;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw ConfigError(std::string(what) + " rate must divide the base rate");
  }
  return static_cast<int>(rounded);
}

}  // namespace

void CurrentConfig::validate() const {
  if (!(cap >= 0.0) || !(bias_max >= 0.0) || !(sinusoid_amplitude >= 0.0) ||
      !(noise_std >= 0.0) || !(heave_ratio >= 0.0)) {
    throw ConfigError("current magnitudes must be non-negative");
  }
  if (!(period_min > 0.0) || !(period_max >= period_min)) {
    throw ConfigError("current periods must satisfy 0 < min <= max");
  }
  if (!(noise_time_constant > 0.0) || !(knot_spacing > 0.0)) {
    throw ConfigError("current noise time constants must be positive");
  }
}

CurrentProfile::CurrentProfile(const CurrentConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(make_stream(seed, kCurrentStream)) {
  cfg_.validate();
  const double r = cfg_.bias_max * std::sqrt(uniform01(rng_));
  const double angle = uniform(rng_, -kPi, kPi);
  bias_ = Vec3(r * std::cos(angle), r * std::sin(angle), 0.0);
  const Vec3 scale(1.0, 1.0, cfg_.heave_ratio);
  for (std::size_t i = 0; i < amplitude_.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      amplitude_[i][c] = scale[c] * uniform(rng_, 0.0, cfg_.sinusoid_amplitude);
      omega_[i][c] = 2.0 * kPi / uniform(rng_, cfg_.period_min, cfg_.period_max);
      phase_[i][c] = uniform(rng_, -kPi, kPi);
    }
  }
  Vec3 n0;
  for (int c = 0; c < 3; ++c) n0[c] = scale[c] * cfg_.noise_std * standard_normal(rng_);
  noise_.push_back(n0);
}

void CurrentProfile::extend_to(std::size_t knot) {
  const double rho = std::exp(-cfg_.knot_spacing / cfg_.noise_time_constant);
  const double innovation = cfg_.noise_std * std::sqrt(1.0 - rho * rho);
  const Vec3 scale(1.0, 1.0, cfg_.heave_ratio);
  while (noise_.size() <= knot) {
    Vec3 next;
    for (int c = 0; c < 3; ++c) {
      next[c] = rho * noise_.back()[c] + scale[c] * innovation * standard_normal(rng_);
    }
    noise_.push_back(next);
  }
}

Vec3 CurrentProfile::at(double t) {
  if (!(t >= 0.0)) throw ConfigError("current profile is defined for t >= 0");
  const double x = t / cfg_.knot_spacing;
  const auto k = static_cast<std::size_t>(std::floor(x));
  extend_to(k + 1);
  const double w = x - static_cast<double>(k);
  Vec3 c = bias_ + (1.0 - w) * noise_[k] + w * noise_[k + 1];
  for (std::size_t i = 0; i < amplitude_.size(); ++i) {
    for (int j = 0; j < 3; ++j) c[j] += amplitude_[i][j] * std::sin(omega_[i][j] * t + phase_[i][j]);
  }
  const double horizontal = std::hypot(c.x(), c.y());
  if (horizontal > cfg_.cap) {
    c.x() *= cfg_.cap / horizontal;
    c.y() *= cfg_.cap / horizontal;
  }
  const double heave_cap = cfg_.heave_ratio * cfg_.cap;
  c.z() = std::clamp(c.z(), -heave_cap, heave_cap);
  return c;
}

void WaypointConfig::validate() const {
  if (count < 2) throw ConfigError("at least two waypoints are required");
  if (!((box_max - box_min).minCoeff() >= 0.0)) throw ConfigError("waypoint box is empty");
  if (!(min_spacing >= 0.0) || !(glide_margin > 0.0 && glide_margin <= 1.0) || max_draws < 1) {
    throw ConfigError("invalid waypoint sampling settings");
  }
}

std::vector<Waypoint> generate_waypoints(const WaypointConfig& cfg, double glide_max,
                                         std::uint64_t seed) {
  cfg.validate();
  auto rng = make_stream(seed, kWaypointStream);
  auto draw = [&] {
    return Waypoint{uniform(rng, cfg.box_min.x(), cfg.box_max.x()),
                    uniform(rng, cfg.box_min.y(), cfg.box_max.y()),
                    uniform(rng, cfg.box_min.z(), cfg.box_max.z())};
  };
  const double max_slope = std::tan(cfg.glide_margin * glide_max);
  std::vector<Waypoint> wps{draw()};
  while (static_cast<int>(wps.size()) < cfg.count) {
    const Waypoint& prev = wps.back();
    bool placed = false;
    for (int attempt = 0; attempt < cfg.max_draws && !placed; ++attempt) {
      const Waypoint w = draw();
      const double dist = std::hypot(w.n - prev.n, w.e - prev.e);
      if (dist < cfg.min_spacing || dist <= 0.0) continue;
      if (std::abs(w.d - prev.d) > max_slope * dist) continue;
      wps.push_back(w);
      placed = true;
    }
    if (!placed) throw ConfigError("could not place a glide-feasible waypoint");
  }
  return wps;
}

std::string_view to_string(CostVariant v) {
  return v == CostVariant::kQuadratic ? "quadratic" : "original";
}

CostVariant parse_cost_variant(std::string_view text) {
  if (text == "original") return CostVariant::kOriginal;
  if (text == "quadratic") return CostVariant::kQuadratic;
  throw ConfigError("unknown cost variant '" + std::string(text) + "'");
}

void ScenarioConfig::validate() const {
  nominal.validate();
  current.validate();
  sensors.validate();
  waypoints.validate();
  if (!(g_max > 0.0)) throw ConfigError("g_max must be positive");
  if (!(t_max_factor > 0.0)) throw ConfigError("T_max factor must be positive");
  if (!(r_plan_max >= 1.0)) throw ConfigError("r_plan_max must be at least 1 m");
  if (!(arrival_radius > 0.0)) throw ConfigError("arrival radius must be positive");
  if (!(base_rate > 0.0)) throw ConfigError("base rate must be positive");
  if (!(guidance.glide_max > 0.0 && guidance.glide_max < 0.5 * kPi)) {
    throw ConfigError("glide limit must be in (0, pi/2)");
  }
  stride_of(base_rate, sensors.ahrs_rate, "AHRS");
  stride_of(base_rate, sensors.pressure_rate, "pressure");
  stride_of(base_rate, sensors.usbl_rate, "USBL");
  stride_of(base_rate, controller.rate, "controller");
}

namespace {

Belief initial_belief(const VehicleState& truth, const InitialUncertainty& u, std::uint64_t seed) {
  auto rng = make_stream(seed, kInitialStream);
  FilterVector std_dev;
  std_dev << Vec6::Constant(u.velocity_std), Vec3::Constant(u.position_std),
      Vec3::Constant(u.attitude_std), u.current_std, u.current_std;
  FilterVector mean = filter_state_of(truth, 0.0, 0.0);
  for (int i = 0; i < kFilterStates; ++i) {
    if (i == filter_index::kCurrentU || i == filter_index::kCurrentV) continue;
    mean[i] += std_dev[i] * standard_normal(rng);
  }
  for (int idx : kFilterAngles) mean[idx] = wrap_angle(mean[idx]);
  Belief b;
  b.mean = mean;
  b.cov = std_dev.cwiseProduct(std_dev).asDiagonal();
  return b;
}

}  // namespace

EpisodeResult run_episode(const GncParams& a, const ScenarioConfig& cfg) {
  cfg.validate();
  const ParamBounds bounds = default_bounds(cfg.r_plan_max);
  if (!bounds.contains(a, 1e-12)) throw ConfigError("GNC parameters outside their bounds");

  const int ahrs_stride = stride_of(cfg.base_rate, cfg.sensors.ahrs_rate, "AHRS");
  const int pressure_stride = stride_of(cfg.base_rate, cfg.sensors.pressure_rate, "pressure");
  const int usbl_stride = stride_of(cfg.base_rate, cfg.sensors.usbl_rate, "USBL");
  const int ctrl_stride = stride_of(cfg.base_rate, cfg.controller.rate, "controller");
  const double dt = 1.0 / cfg.base_rate;

  EpisodeResult result;
  result.params = a;
  result.seed = cfg.seed;

  const PlantModel design(cfg.nominal);
  const PlantModel plant(perturb_params(cfg.nominal, cfg.seed, cfg.mismatch));
  const GuidanceConfig guidance = guidance_config_of(a, cfg.guidance);
  const auto waypoints = generate_waypoints(cfg.waypoints, guidance.glide_max, cfg.seed);
  const ReferencePath path =
      build_reference(waypoints, a.plan_radius(), a.surge_ref(), guidance.glide_max);
  result.path_length = path.length();
  const double t_max = cfg.t_max_factor * path.length() / a.surge_ref();
  const auto max_steps = static_cast<long>(std::ceil(t_max * cfg.base_rate));

  CurrentProfile current(cfg.current, cfg.seed);
  SensorSuite sensors(cfg.sensors, cfg.seed);

  VehicleState truth;
  const PathSample start = path.sample(0.0);
  truth.eta << start.n, start.e, start.d, 0.0, 0.0, start.course;
  ThrusterState thrusters;

  PathTracker nav_tracker(path);
  PathTracker truth_tracker(path);
  const std::size_t last_leg_segment = path.segment_at(path.leg_start(path.leg_count() - 1));
  const Waypoint& goal = waypoints.back();

  Trace& trace = result.trace;
  RateCounts& counts = result.counts;
  double g = 0.0;
  double t = 0.0;
  bool finished = false;

  try {
    const FilterNoiseConfig noise = filter_noise_of(a, cfg.sensors);
    NavigationFilter filter(design, noise, cfg.sensors,
                            initial_belief(truth, cfg.initial, cfg.seed));
    Controller controller(design, controller_config_of(a, cfg.controller));
    ThrusterCommand command;

    for (long k = 0;; ++k) {
      t = static_cast<double>(k) * dt;
      const bool tick = k % ctrl_stride == 0;

      std::optional<Projection> truth_proj;
      if (tick) {
        truth_proj = truth_tracker.project(truth.eta[0], truth.eta[1]);
        const double depth_error = truth.eta[2] - truth_proj->point.d;
        g = std::max(g, std::hypot(truth_proj->cross_track, depth_error));
        const bool on_last_leg = path.segment_at(truth_proj->s) >= last_leg_segment;
        const double to_goal = std::hypot(truth.eta[0] - goal.n, truth.eta[1] - goal.e);
        if (k > 0 && on_last_leg &&
            (to_goal < cfg.arrival_radius || truth_proj->s >= path.length() - 1e-9)) {
          finished = true;
          break;
        }
        if (k >= max_steps) {
          throw CrashSignal(CrashReason::kTimeout, "final waypoint not reached within T_max");
        }
      }

      if (k % usbl_stride == 0) {
        sensors.trigger_usbl(truth.position(), t);
        ++counts.usbl_triggered;
      }
      for (const Measurement& m : sensors.release(t)) {
        filter.correct(m);
        ++counts.usbl_applied;
      }
      if (k % pressure_stride == 0) {
        filter.correct(sensors.pressure(truth.eta[2], t));
        ++counts.pressure;
      }
      if (k % ahrs_stride == 0) {
        filter.correct(sensors.ahrs(truth.attitude(), t));
        ++counts.ahrs;
      }

      const Vec3 current_now = current.at(t);
      if (tick) {
        const VehicleState est = filter.estimate();
        if (!est.finite()) {
          throw CrashSignal(CrashReason::kNumericalDivergence, "non-finite state estimate");
        }
        const Projection nav = nav_tracker.project(est.eta[0], est.eta[1]);
        ControlReference ref;
        ref.surge = a.surge_ref();
        ref.yaw = los_yaw(nav.course, nav.cross_track, guidance.lookahead,
                          sideslip_estimate(est.nu[0], est.nu[1], guidance.surge_floor));
        ref.pitch = los_pitch(nav.point.path_pitch, nav.point.d - est.eta[2], guidance.lookahead,
                              guidance.glide_max);
        command = controller.update(est, ref);
        ++counts.controller;

        {
          TraceSample row;
          row.t = t;
          row.truth = truth;
          row.estimate = est;
          row.current = current_now;
          row.s = truth_proj->s;
          row.reference = truth_proj->point;
          row.cross_track = truth_proj->cross_track;
          row.depth_error = truth.eta[2] - truth_proj->point.d;
          row.command_ref = ref;
          row.command = command;
          trace.samples.push_back(row);
        }
      }

      const StepResult next = step(truth, thrusters, command, current_now, plant, dt);
      truth = next.state;
      thrusters = next.thrusters;
      ++counts.plant;
      filter.predict(command, dt);
      ++counts.predict;
    }
  } catch (const CrashSignal& crash) {
    result.l = false;
    result.reason = crash.reason();
    result.message = crash.what();
  }

  result.t_end = t;
  trace.t_end = t;
  trace.complete = finished;
  if (finished) {
    result.l = true;
    result.reason = CrashReason::kNone;
    result.g = g;
    result.j = energy_cost(trace, cfg.cost);
  } else {
    result.j = std::numeric_limits<double>::quiet_NaN();
    result.g = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

double command_power(double u, CostVariant variant) {
  if (u == 0.0) return 0.0;
  const double m = std::abs(u);
  if (variant == CostVariant::kQuadratic) return 0.025 + m * m;
  // |u + u^1.5| with u^1.5 = sgn(u) |u|^1.5
  return 0.025 + m + m * std::sqrt(m);
}

double energy_cost(const Trace& trace, CostVariant variant) {
  if (!trace.complete) throw ConfigError("energy cost needs a complete trace");
  double integral = 0.0;
  const auto& rows = trace.samples;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double t_next = k + 1 < rows.size() ? rows[k + 1].t : trace.t_end;
    const double hold = t_next - rows[k].t;
    if (!(hold >= 0.0)) throw ConfigError("trace timestamps must be non-decreasing");
    const ThrusterCommand& c = rows[k].command;
    integral += hold * (command_power(c.surge, variant) + command_power(c.rl, variant) +
                        command_power(c.ud, variant));
  }
  return trace.t_end + integral;
}

double max_deviation(const Trace& trace) {
  double g = 0.0;
  for (const TraceSample& row : trace.samples) {
    g = std::max(g, std::hypot(row.cross_track, row.depth_error));
  }
  return g;
}

Aggregate robust_aggregate(const std::vector<EpisodeResult>& results) {
  if (results.empty()) throw ConfigError("robust aggregation needs at least one result");
  Aggregate agg;
  agg.l = true;
  double sum = 0.0;
  for (const EpisodeResult& r : results) {
    sum += r.j;
    agg.g = std::max(agg.g, r.g);
    agg.l = agg.l && r.l;
  }
  agg.j = sum / static_cast<double>(results.size());
  if (!agg.l) {
    agg.j = std::numeric_limits<double>::quiet_NaN();
    agg.g = std::numeric_limits<double>::quiet_NaN();
  }
  return agg;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << "t,n,e,d,phi,theta,psi,u,v,w,p,q,r,"
         "n_hat,e_hat,d_hat,phi_hat,theta_hat,psi_hat,u_hat,v_hat,w_hat,p_hat,q_hat,r_hat,"
         "current_n,current_e,current_d,s,n_ref,e_ref,d_ref,course_ref,path_pitch,"
         "cross_track,depth_error,u_ref,theta_d,psi_d,u_surge,u_rl,u_ud\n";
  const auto old_precision = out.precision(10);
  for (const TraceSample& r : trace.samples) {
    out << r.t;
    for (int i = 0; i < 6; ++i) out << ',' << r.truth.eta[i];
    for (int i = 0; i < 6; ++i) out << ',' << r.truth.nu[i];
    for (int i = 0; i < 6; ++i) out << ',' << r.estimate.eta[i];
    for (int i = 0; i < 6; ++i) out << ',' << r.estimate.nu[i];
    out << ',' << r.current.x() << ',' << r.current.y() << ',' << r.current.z() << ',' << r.s
        << ',' << r.reference.n << ',' << r.reference.e << ',' << r.reference.d << ','
        << r.reference.course << ',' << r.reference.path_pitch << ',' << r.cross_track << ','
        << r.depth_error << ',' << r.command_ref.surge << ',' << r.command_ref.pitch << ','
        << r.command_ref.yaw << ',' << r.command.surge << ',' << r.command.rl << ','
        << r.command.ud << '\n';
  }
  out.precision(old_precision);
}

nlohmann::json to_json(const EpisodeResult& r) {
  nlohmann::json params = nlohmann::json::object();
  for (int i = 0; i < kParamCount; ++i) params[std::string(param_name(i))] = r.params[i];
  nlohmann::json out;
  out["params"] = params;
  out["seed"] = r.seed;
  out["j"] = r.l ? nlohmann::json(r.j) : nlohmann::json(nullptr);
  out["g"] = r.l ? nlohmann::json(r.g) : nlohmann::json(nullptr);
  out["l"] = r.l ? 1 : 0;
  out["reason"] = std::string(to_string(r.reason));
  out["T_end"] = r.t_end;
  return out;
}

}  // namespace auvtune
