#include "auvtune/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace auvtune {

namespace {

using nlohmann::json;

/// Reads the keys of one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    known_.insert(key);
    return node_.contains(key);
  }

  const json& raw(const std::string& key) { return node_.at(key); }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    out = v.get<double>();
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    out = v.get<int>();
  }

  void unsigned_integer(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(where(key) + ": expected an unsigned integer");
    out = v.get<std::uint64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected a boolean");
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    out = v.get<std::string>();
  }

  template <int N>
  void vector(const std::string& key, Eigen::Matrix<double, N, 1>& out) {
    if (!has(key)) return;
    read_array(node_.at(key), where(key), N, [&](int i, double x) { out[i] = x; });
  }

  template <std::size_t N>
  void array(const std::string& key, std::array<double, N>& out) {
    if (!has(key)) return;
    read_array(node_.at(key), where(key), static_cast<int>(N),
               [&](int i, double x) { out[static_cast<std::size_t>(i)] = x; });
  }

  template <typename F>
  static void read_array(const json& v, const std::string& at, int n, F&& set) {
    if (!v.is_array() || static_cast<int>(v.size()) != n) {
      throw ConfigError(at + ": expected an array of " + std::to_string(n) + " numbers");
    }
    for (int i = 0; i < n; ++i) {
      const json& e = v[static_cast<std::size_t>(i)];
      if (!e.is_number()) throw ConfigError(at + ": expected numbers");
      set(i, e.get<double>());
    }
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!known_.count(item.key())) throw ConfigError(path_ + ": unknown key '" + item.key() + "'");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> known_;
};

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <std::size_t N>
json array_json(const std::array<double, N>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

void read_vehicle(Section& s, VehicleConfig& v) {
  s.number("mass", v.mass);
  s.vector("inertia", v.inertia);
  s.vector("center_of_gravity", v.center_of_gravity);
  s.vector("center_of_buoyancy", v.center_of_buoyancy);
  s.number("buoyancy_ratio", v.buoyancy_ratio);
  s.vector("added_mass", v.added_mass);
  if (s.has("drag")) {
    Section d(s.raw("drag"), s.where("drag"));
    d.number("surge", v.drag.surge);
    d.number("sway_heave", v.drag.sway_heave);
    d.number("roll", v.drag.roll);
    d.number("pitch_yaw", v.drag.pitch_yaw);
    d.finish();
  }
  if (s.has("thrusters")) {
    const json& t = s.raw("thrusters");
    if (!t.is_array() || t.size() != static_cast<std::size_t>(kThrusterCount)) {
      throw ConfigError(s.where("thrusters") + ": expected " + std::to_string(kThrusterCount) +
                        " thrusters");
    }
    for (int i = 0; i < kThrusterCount; ++i) {
      const auto k = static_cast<std::size_t>(i);
      Section th(t[k], s.where("thrusters") + "[" + std::to_string(i) + "]");
      th.vector("position", v.thrusters.position[k]);
      th.vector("direction", v.thrusters.direction[k]);
      th.number("max_force", v.thrusters.max_force[k]);
      th.finish();
    }
  }
  s.number("thruster_time_constant", v.thruster_time_constant);
  s.array("thruster_gain", v.thruster_gain);
}

void read_scenario_sections(Section& root, ScenarioConfig& sc) {
  if (root.has("mismatch")) {
    Section s(root.raw("mismatch"), "mismatch");
    s.number("drag_rel_std", sc.mismatch.drag_rel_std);
    s.number("mass_rel_std", sc.mismatch.mass_rel_std);
    s.number("added_mass_rel_std", sc.mismatch.added_mass_rel_std);
    s.number("thruster_gain_rel_std", sc.mismatch.thruster_gain_rel_std);
    s.finish();
  }
  if (root.has("current")) {
    Section s(root.raw("current"), "current");
    auto& c = sc.current;
    s.number("cap", c.cap);
    s.number("bias_max", c.bias_max);
    s.number("sinusoid_amplitude", c.sinusoid_amplitude);
    s.number("period_min", c.period_min);
    s.number("period_max", c.period_max);
    s.number("noise_std", c.noise_std);
    s.number("noise_time_constant", c.noise_time_constant);
    s.number("heave_ratio", c.heave_ratio);
    s.number("knot_spacing", c.knot_spacing);
    s.finish();
  }
  if (root.has("sensors")) {
    Section s(root.raw("sensors"), "sensors");
    auto& c = sc.sensors;
    s.number("usbl_std", c.usbl_std);
    s.number("pressure_depth_std", c.pressure_depth_std);
    s.number("ahrs_std", c.ahrs_std);
    s.number("pressure_per_meter", c.pressure_per_meter);
    s.number("surface_pressure", c.surface_pressure);
    s.number("sound_speed", c.sound_speed);
    s.vector("usbl_origin", c.usbl_origin);
    s.number("usbl_rate", c.usbl_rate);
    s.number("pressure_rate", c.pressure_rate);
    s.number("ahrs_rate", c.ahrs_rate);
    s.finish();
  }
  if (root.has("waypoints")) {
    Section s(root.raw("waypoints"), "waypoints");
    auto& w = sc.waypoints;
    s.integer("count", w.count);
    s.vector("box_min", w.box_min);
    s.vector("box_max", w.box_max);
    s.number("min_spacing", w.min_spacing);
    s.number("glide_margin", w.glide_margin);
    s.integer("max_draws", w.max_draws);
    s.finish();
  }
  if (root.has("guidance")) {
    Section s(root.raw("guidance"), "guidance");
    s.number("glide_max", sc.guidance.glide_max);
    s.number("surge_floor", sc.guidance.surge_floor);
    s.finish();
  }
  if (root.has("controller")) {
    Section s(root.raw("controller"), "controller");
    s.number("rate", sc.controller.rate);
    s.number("integral_limit", sc.controller.integral_limit);
    s.finish();
  }
  if (root.has("initial_uncertainty")) {
    Section s(root.raw("initial_uncertainty"), "initial_uncertainty");
    auto& u = sc.initial;
    s.number("position_std", u.position_std);
    s.number("attitude_std", u.attitude_std);
    s.number("velocity_std", u.velocity_std);
    s.number("current_std", u.current_std);
    s.finish();
  }
  if (root.has("scenario")) {
    Section s(root.raw("scenario"), "scenario");
    s.number("base_rate", sc.base_rate);
    s.number("g_max", sc.g_max);
    s.number("r_plan_max", sc.r_plan_max);
    s.number("t_max_factor", sc.t_max_factor);
    s.number("arrival_radius", sc.arrival_radius);
    std::string cost(to_string(sc.cost));
    s.string("cost", cost);
    sc.cost = parse_cost_variant(cost);
    s.unsigned_integer("seed", sc.seed);
    s.finish();
  }
}

void read_defaults(const json& node, GncParams& a) {
  if (!node.is_object()) throw ConfigError("defaults: expected an object");
  for (const auto& item : node.items()) {
    const int i = param_index(item.key());
    if (i < 0) throw ConfigError("defaults: unknown key '" + item.key() + "'");
    if (!item.value().is_number()) throw ConfigError("defaults." + item.key() + ": expected a number");
    a[i] = item.value().get<double>();
  }
}

void read_tiers(const json& node, std::map<std::string, TierSpec>& tiers) {
  if (!node.is_object()) throw ConfigError("tiers: expected an object");
  for (const auto& item : node.items()) {
    TierSpec t = tiers.count(item.key()) ? tiers.at(item.key()) : TierSpec{};
    Section s(item.value(), "tiers." + item.key());
    s.number("r_plan_max", t.r_plan_max);
    s.number("g_max", t.g_max);
    std::string mode(to_string(t.mode));
    s.string("mode", mode);
    t.mode = parse_bo_mode(mode);
    s.finish();
    tiers[item.key()] = t;
  }
}

void read_optimizer(Section& s, OptimizerSettings& o) {
  s.integer("budget_multiplier", o.budget_multiplier);
  s.integer("y_star_samples", o.y_star_samples);
  s.integer("y_star_candidates", o.y_star_candidates);
  s.integer("acquisition_candidates", o.acquisition_candidates);
  s.integer("refine_starts", o.refine_starts);
  s.integer("refine_iterations", o.refine_iterations);
  s.integer("gp_random_starts", o.gp_random_starts);
  s.integer("gp_refine_top", o.gp_refine_top);
  s.integer("gp_max_steps", o.gp_max_steps);
  s.boolean("record_wallclock", o.record_wallclock);
}

void read_experiment(Section& s, ExperimentSettings& e) {
  s.integer("repeats", e.repeats);
  if (s.has("robust_seeds")) {
    const json& v = s.raw("robust_seeds");
    if (!v.is_array() || v.size() != e.robust_seeds.size()) {
      throw ConfigError("experiment.robust_seeds: expected an array of 5 unsigned integers");
    }
    for (std::size_t i = 0; i < e.robust_seeds.size(); ++i) {
      if (!v[i].is_number_unsigned()) {
        throw ConfigError("experiment.robust_seeds: expected unsigned integers");
      }
      e.robust_seeds[i] = v[i].get<std::uint64_t>();
    }
  }
  s.integer("validation_seeds", e.validation_seeds);
  s.unsigned_integer("validation_master_seed", e.validation_master_seed);
}

}  // namespace

HydroParams VehicleConfig::to_hydro() const {
  if (!(mass > 0.0)) throw ConfigError("vehicle.mass must be positive");
  if (!(buoyancy_ratio > 0.0)) throw ConfigError("vehicle.buoyancy_ratio must be positive");
  HydroParams p;
  p.rigid_body_mass = rigid_body_mass_matrix(mass, inertia, center_of_gravity);
  p.added_mass = added_mass.asDiagonal();
  p.drag = drag;
  p.restoring.weight = mass * 9.80665;
  p.restoring.buoyancy = buoyancy_ratio * p.restoring.weight;
  p.restoring.center_of_gravity = center_of_gravity;
  p.restoring.center_of_buoyancy = center_of_buoyancy;
  p.thrusters = thrusters;
  p.thruster_time_constant = thruster_time_constant;
  p.thruster_gain = thruster_gain;
  p.validate();
  return p;
}

GncParams default_gnc_params() {
  GncParams a;
  a[kAlpha1] = -6.0;
  a[kAlpha2] = -3.0;
  a[kAlpha3] = -1.0;
  a[kAlpha4] = -2.0;
  a[kSurgeRef] = 0.5;
  a[kPlanRadius] = 8.0;
  a[kLookahead] = 5.0;
  a[kQ1] = 0.0;
  a[kQ2] = 0.0;
  a[kQ3] = 1.0;
  a[kQ4] = -2.0;
  a[kQ5] = -2.0;
  a[kDeadband] = 0.0;
  return a;
}

Config default_config() {
  Config cfg;
  cfg.scenario.nominal = cfg.vehicle.to_hydro();
  cfg.defaults = default_gnc_params();
  cfg.tiers["max"] = TierSpec{5.0, 1.5, BoMode::kMinimizeConstraint};
  cfg.tiers["med"] = TierSpec{10.0, 1.5, BoMode::kConstrained};
  cfg.tiers["low"] = TierSpec{15.0, 3.0, BoMode::kConstrained};
  return cfg;
}

void Config::validate() const {
  scenario.validate();
  const auto bounds = default_bounds(scenario.r_plan_max);
  if (!bounds.contains(defaults, 1e-12)) throw ConfigError("defaults lie outside the parameter box");
  for (const auto& [name, t] : tiers) {
    if (!(t.r_plan_max >= 1.0) || !(t.g_max > 0.0)) {
      throw ConfigError("tier '" + name + "' needs r_plan_max >= 1 and g_max > 0");
    }
  }
  if (optimizer.budget_multiplier < 1) throw ConfigError("optimizer.budget_multiplier must be >= 1");
  if (optimizer.y_star_samples < 1 || optimizer.y_star_candidates < 1 ||
      optimizer.acquisition_candidates < 1 || optimizer.refine_starts < 0 ||
      optimizer.refine_iterations < 0 || optimizer.gp_random_starts < 1 ||
      optimizer.gp_refine_top < 0 || optimizer.gp_max_steps < 0) {
    throw ConfigError("optimizer settings out of range");
  }
  if (experiment.repeats < 1) throw ConfigError("experiment.repeats must be >= 1");
  if (experiment.validation_seeds < 0) throw ConfigError("experiment.validation_seeds must be >= 0");
}

ScenarioConfig Config::scenario_for(const TierSpec& t) const {
  ScenarioConfig sc = scenario;
  sc.r_plan_max = t.r_plan_max;
  sc.g_max = t.g_max;
  return sc;
}

const TierSpec& Config::tier(const std::string& name) const {
  auto it = tiers.find(name);
  if (it == tiers.end()) throw ConfigError("unknown tier '" + name + "'");
  return it->second;
}

Config parse_config(const json& doc) {
  Config cfg = default_config();
  Section root(doc, "config");
  if (root.has("vehicle")) {
    Section s(root.raw("vehicle"), "vehicle");
    read_vehicle(s, cfg.vehicle);
    s.finish();
  }
  cfg.scenario.nominal = cfg.vehicle.to_hydro();
  read_scenario_sections(root, cfg.scenario);
  if (root.has("defaults")) read_defaults(root.raw("defaults"), cfg.defaults);
  if (root.has("tiers")) read_tiers(root.raw("tiers"), cfg.tiers);
  if (root.has("optimizer")) {
    Section s(root.raw("optimizer"), "optimizer");
    read_optimizer(s, cfg.optimizer);
    s.finish();
  }
  if (root.has("experiment")) {
    Section s(root.raw("experiment"), "experiment");
    read_experiment(s, cfg.experiment);
    s.finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

json to_json(const Config& cfg) {
  const auto& v = cfg.vehicle;
  json thr = json::array();
  for (int i = 0; i < kThrusterCount; ++i) {
    const auto k = static_cast<std::size_t>(i);
    thr.push_back({{"position", vec_json(v.thrusters.position[k])},
                   {"direction", vec_json(v.thrusters.direction[k])},
                   {"max_force", v.thrusters.max_force[k]}});
  }
  const auto& sc = cfg.scenario;
  json defaults = json::object();
  for (int i = 0; i < kParamCount; ++i) defaults[std::string(param_name(i))] = cfg.defaults[i];
  json tiers = json::object();
  for (const auto& [name, t] : cfg.tiers) {
    tiers[name] = {{"r_plan_max", t.r_plan_max}, {"g_max", t.g_max}, {"mode", to_string(t.mode)}};
  }
  const auto& o = cfg.optimizer;
  const auto& e = cfg.experiment;
  json seeds = json::array();
  for (auto s : e.robust_seeds) seeds.push_back(s);
  return {
      {"vehicle",
       {{"mass", v.mass},
        {"inertia", vec_json(v.inertia)},
        {"center_of_gravity", vec_json(v.center_of_gravity)},
        {"center_of_buoyancy", vec_json(v.center_of_buoyancy)},
        {"buoyancy_ratio", v.buoyancy_ratio},
        {"added_mass", vec_json(v.added_mass)},
        {"drag",
         {{"surge", v.drag.surge},
          {"sway_heave", v.drag.sway_heave},
          {"roll", v.drag.roll},
          {"pitch_yaw", v.drag.pitch_yaw}}},
        {"thrusters", thr},
        {"thruster_time_constant", v.thruster_time_constant},
        {"thruster_gain", array_json(v.thruster_gain)}}},
      {"mismatch",
       {{"drag_rel_std", sc.mismatch.drag_rel_std},
        {"mass_rel_std", sc.mismatch.mass_rel_std},
        {"added_mass_rel_std", sc.mismatch.added_mass_rel_std},
        {"thruster_gain_rel_std", sc.mismatch.thruster_gain_rel_std}}},
      {"current",
       {{"cap", sc.current.cap},
        {"bias_max", sc.current.bias_max},
        {"sinusoid_amplitude", sc.current.sinusoid_amplitude},
        {"period_min", sc.current.period_min},
        {"period_max", sc.current.period_max},
        {"noise_std", sc.current.noise_std},
        {"noise_time_constant", sc.current.noise_time_constant},
        {"heave_ratio", sc.current.heave_ratio},
        {"knot_spacing", sc.current.knot_spacing}}},
      {"sensors",
       {{"usbl_std", sc.sensors.usbl_std},
        {"pressure_depth_std", sc.sensors.pressure_depth_std},
        {"ahrs_std", sc.sensors.ahrs_std},
        {"pressure_per_meter", sc.sensors.pressure_per_meter},
        {"surface_pressure", sc.sensors.surface_pressure},
        {"sound_speed", sc.sensors.sound_speed},
        {"usbl_origin", vec_json(sc.sensors.usbl_origin)},
        {"usbl_rate", sc.sensors.usbl_rate},
        {"pressure_rate", sc.sensors.pressure_rate},
        {"ahrs_rate", sc.sensors.ahrs_rate}}},
      {"waypoints",
       {{"count", sc.waypoints.count},
        {"box_min", vec_json(sc.waypoints.box_min)},
        {"box_max", vec_json(sc.waypoints.box_max)},
        {"min_spacing", sc.waypoints.min_spacing},
        {"glide_margin", sc.waypoints.glide_margin},
        {"max_draws", sc.waypoints.max_draws}}},
      {"guidance", {{"glide_max", sc.guidance.glide_max}, {"surge_floor", sc.guidance.surge_floor}}},
      {"controller",
       {{"rate", sc.controller.rate}, {"integral_limit", sc.controller.integral_limit}}},
      {"initial_uncertainty",
       {{"position_std", sc.initial.position_std},
        {"attitude_std", sc.initial.attitude_std},
        {"velocity_std", sc.initial.velocity_std},
        {"current_std", sc.initial.current_std}}},
      {"scenario",
       {{"base_rate", sc.base_rate},
        {"g_max", sc.g_max},
        {"r_plan_max", sc.r_plan_max},
        {"t_max_factor", sc.t_max_factor},
        {"arrival_radius", sc.arrival_radius},
        {"cost", to_string(sc.cost)},
        {"seed", sc.seed}}},
      {"defaults", defaults},
      {"tiers", tiers},
      {"optimizer",
       {{"budget_multiplier", o.budget_multiplier},
        {"y_star_samples", o.y_star_samples},
        {"y_star_candidates", o.y_star_candidates},
        {"acquisition_candidates", o.acquisition_candidates},
        {"refine_starts", o.refine_starts},
        {"refine_iterations", o.refine_iterations},
        {"gp_random_starts", o.gp_random_starts},
        {"gp_refine_top", o.gp_refine_top},
        {"gp_max_steps", o.gp_max_steps},
        {"record_wallclock", o.record_wallclock}}},
      {"experiment",
       {{"repeats", e.repeats},
        {"robust_seeds", seeds},
        {"validation_seeds", e.validation_seeds},
        {"validation_master_seed", e.validation_master_seed}}},
  };
}

}  // namespace auvtune
