#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "auvtune/harness.hpp"
#include "auvtune/optimizer.hpp"
#include "auvtune/params.hpp"

namespace auvtune {

/// Physical description of the vehicle from which HydroParams is built.
struct VehicleConfig {
  double mass = 15.0;                            // kg
  Vec3 inertia{0.06, 0.35, 0.35};                // kg m^2 about the body origin
  Vec3 center_of_gravity = Vec3::Zero();         // m
  Vec3 center_of_buoyancy{0.0, 0.0, -0.005};     // m
  double buoyancy_ratio = 1.0;                   // buoyancy / weight
  Vec6 added_mass = (Vec6() << 1.5, 9.0, 9.0, 0.006, 0.1, 0.1).finished();
  DragCoefficients drag{};
  ThrusterGeometry thrusters = default_hydro_params().thrusters;
  double thruster_time_constant = 0.2;           // s
  std::array<double, kThrusterCount> thruster_gain{1.0, 1.0, 1.0, 1.0, 1.0};

  HydroParams to_hydro() const;
};

/// One accuracy requirement level.
struct TierSpec {
  double r_plan_max = 10.0;
  double g_max = 1.5;
  BoMode mode = BoMode::kConstrained;
};

/// Settings of the tuning loop that are not per-run.
struct OptimizerSettings {
  int budget_multiplier = 45;
  int y_star_samples = 10;
  int y_star_candidates = 512;
  int acquisition_candidates = 2000;
  int refine_starts = 5;
  int refine_iterations = 40;
  int gp_random_starts = 50;
  int gp_refine_top = 3;
  int gp_max_steps = 200;
  bool record_wallclock = false;
};

struct ExperimentSettings {
  int repeats = 5;
  std::array<std::uint64_t, 5> robust_seeds{1, 2, 3, 4, 5};
  int validation_seeds = 25;
  std::uint64_t validation_master_seed = 1000;
};

struct Config {
  VehicleConfig vehicle{};
  ScenarioConfig scenario{};  // scenario.nominal mirrors vehicle.to_hydro()
  GncParams defaults{};
  std::map<std::string, TierSpec> tiers;
  OptimizerSettings optimizer{};
  ExperimentSettings experiment{};

  /// Throws ConfigError when any section is invalid.
  void validate() const;
  /// Scenario copy for an accuracy tier (r_plan_max and g_max replaced).
  ScenarioConfig scenario_for(const TierSpec& tier) const;
  const TierSpec& tier(const std::string& name) const;
};

/// Hand-tuned parametrization used when a subset of a is optimized.
GncParams default_gnc_params();

/// Built-in configuration: default vehicle, scenario and the three tiers
/// max (r_plan <= 5, minimize g), med (r_plan <= 10, g <= 1.5) and
/// low (r_plan <= 15, g <= 3).
Config default_config();

/// Overlays a JSON document on default_config(). Every key is optional;
/// unknown keys and ill-typed values raise ConfigError.
Config parse_config(const nlohmann::json& doc);
Config load_config(const std::string& path);
nlohmann::json to_json(const Config& cfg);

}  // namespace auvtune
