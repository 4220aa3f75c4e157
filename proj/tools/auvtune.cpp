#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "auvtune/config.hpp"
#include "auvtune/experiment.hpp"
#include "auvtune/harness.hpp"

namespace {

namespace fs = std::filesystem;
using namespace auvtune;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 2;
constexpr int kExitConfig = 3;

struct Common {
  std::string config_path;
  std::string tier = "med";
  std::string cost = "original";
  std::uint64_t seed = 1;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON configuration file (defaults built in)");
  cmd->add_option("--tier", c.tier, "Accuracy tier: max, med or low");
  cmd->add_option("--cost", c.cost, "Power model: original or quadratic");
  cmd->add_option("--seed", c.seed, "Scenario seed / master seed");
  cmd->add_option("--out", c.out, "Output directory");
}

Config load(const Common& c) {
  return c.config_path.empty() ? default_config() : load_config(c.config_path);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

// Accepts a bare {name: value} object, an episode record or a summary.json.
GncParams params_from_file(const std::string& path, const GncParams& base) {
  const nlohmann::json doc = read_json(path);
  if (doc.contains("best_run")) {
    if (!doc.at("best_run").is_object()) throw ConfigError("'" + path + "' has no best run");
    return params_from_json(doc.at("best_run").at("a_best"), base);
  }
  if (doc.contains("params")) return params_from_json(doc.at("params"), base);
  return params_from_json(doc, base);
}

GncParams resolve_params(const Config& cfg, const std::string& file,
                         const std::vector<std::string>& overrides) {
  GncParams a = file.empty() ? cfg.defaults : params_from_file(file, cfg.defaults);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects name=value, got '" + kv + "'");
    const int i = param_index(kv.substr(0, eq));
    if (i < 0) throw ConfigError("unknown parameter '" + kv.substr(0, eq) + "'");
    try {
      a[i] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad value in '" + kv + "'");
    }
  }
  return a;
}

ScenarioConfig scenario_of(const Config& cfg, const Common& c) {
  ScenarioConfig sc = cfg.scenario_for(cfg.tier(c.tier));
  sc.cost = parse_cost_variant(c.cost);
  sc.seed = c.seed;
  return sc;
}

int run_tune(const Common& c, const std::string& mask, const std::string& kind, int budget_mult,
             int repeats, bool robust, bool resume) {
  const Config cfg = load(c);
  ExperimentSpec spec;
  spec.mask = parse_mask(mask);
  spec.tier = c.tier;
  spec.cost = parse_cost_variant(c.cost);
  spec.robust = robust;
  spec.seed = c.seed;
  spec.budget_multiplier = budget_mult > 0 ? budget_mult : cfg.optimizer.budget_multiplier;
  spec.repeats = repeats > 0 ? repeats : cfg.experiment.repeats;
  spec.out_dir = c.out;
  spec.resume = resume;
  if (resume && c.out.empty()) throw ConfigError("--resume needs --out");
  if (!kind.empty()) {
    spec.kind = parse_study_kind(kind);
  } else if (robust) {
    spec.kind = StudyKind::kRobust;
  } else if (spec.cost != CostVariant::kOriginal) {
    spec.kind = StudyKind::kCostVariant;
  } else if (c.tier != "med") {
    spec.kind = StudyKind::kAccuracyTier;
  } else {
    spec.kind = spec.mask == ParamMask::kAll ? StudyKind::kJoint : StudyKind::kIndividual;
  }
  const ExperimentReport rep = run_experiment(cfg, spec);
  std::cout << format_report({rep.to_json()});
  for (const RunRecord& r : rep.runs) {
    if (!r.ok) std::cerr << "run " << r.repeat << " aborted: " << r.error << '\n';
  }
  return rep.complete() ? kExitOk : kExitPartial;
}

int run_validate(const Common& c, const std::string& params_file,
                 const std::vector<std::string>& overrides, int n_seeds,
                 const std::optional<std::uint64_t>& master_seed) {
  const Config cfg = load(c);
  const GncParams a = resolve_params(cfg, params_file, overrides);
  const ScenarioConfig sc = scenario_of(cfg, c);
  const int n = n_seeds >= 0 ? n_seeds : cfg.experiment.validation_seeds;
  const std::uint64_t master = master_seed.value_or(cfg.experiment.validation_master_seed);
  const ValidationReport rep = validate(a, sc, n, master, worker_count());
  const nlohmann::json out = rep.to_json();
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    std::ofstream(fs::path(c.out) / "validation.json") << out.dump(2) << '\n';
  }
  std::cout << "seed        l        j        g  violation\n";
  for (const ValidationRow& r : rep.rows) {
    std::cout << r.seed << "  " << r.l << "  " << r.j << "  " << r.g << "  "
              << (r.violation ? "yes" : "no") << '\n';
  }
  std::cout << "constraint violations: " << rep.constraint_violations << " / " << rep.rows.size()
            << ", crashes: " << rep.crashes << ", mean J: " << rep.mean_j << '\n';
  return kExitOk;
}

int run_simulate(const Common& c, const std::string& params_file,
                 const std::vector<std::string>& overrides) {
  const Config cfg = load(c);
  const GncParams a = resolve_params(cfg, params_file, overrides);
  const EpisodeResult r = run_episode(a, scenario_of(cfg, c));
  nlohmann::json rec = to_json(r);
  std::cout << rec.dump() << '\n';
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    std::ofstream(fs::path(c.out) / "episode.json") << rec.dump(2) << '\n';
    std::ofstream trace(fs::path(c.out) / "trace.csv");
    write_trace_csv(r.trace, trace);
  }
  return kExitOk;
}

int run_report(const std::vector<std::string>& dirs, const std::string& out) {
  std::vector<nlohmann::json> summaries;
  for (const std::string& d : dirs) summaries.push_back(read_json((fs::path(d) / "summary.json").string()));
  const std::string table = format_report(summaries);
  std::cout << table;
  if (!out.empty()) std::ofstream(out) << table;
  bool complete = true;
  for (const auto& s : summaries) complete = complete && s.value("complete", false);
  return complete ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop AUV GNC simulator and constrained Bayesian tuner"};
  app.require_subcommand(1);

  Common common;
  std::string mask = "all";
  std::string kind;
  int budget_mult = 0;
  int repeats = 0;
  bool robust = false;
  bool resume = false;
  std::string params_file;
  std::vector<std::string> overrides;
  int n_seeds = -1;
  std::optional<std::uint64_t> master_seed;
  std::vector<std::string> dirs;
  std::string report_out;
  std::string config_path;

  auto* tune = app.add_subcommand("tune", "Run repeated BO runs of one study");
  add_common(tune, common);
  tune->add_option("--mask", mask, "Parameter subset: plan, control, filter or all");
  tune->add_option("--kind", kind, "Study label: individual, joint, accuracy-tier, cost-variant, robust");
  tune->add_option("--budget-mult", budget_mult, "Evaluations per dimension (default 45)");
  tune->add_option("--repeats", repeats, "Independent runs (default 5)");
  tune->add_flag("--robust", robust, "Aggregate over the configured robust seeds");
  tune->add_flag("--resume", resume, "Continue the run histories found in --out");

  auto* val = app.add_subcommand("validate", "Count constraint violations on fresh seeds");
  add_common(val, common);
  val->add_option("--params", params_file, "Parameter JSON, episode JSON or summary.json");
  val->add_option("--set", overrides, "Override one parameter, name=value");
  val->add_option("--seeds", n_seeds, "Number of validation seeds (default 25)");
  val->add_option("--master-seed", master_seed, "Validation seeds are master + 1 .. master + n");

  auto* sim = app.add_subcommand("simulate", "Run one episode and export its trace");
  add_common(sim, common);
  sim->add_option("--params", params_file, "Parameter JSON, episode JSON or summary.json");
  sim->add_option("--set", overrides, "Override one parameter, name=value");

  auto* rep = app.add_subcommand("report", "Tabulate best and worst J and g of experiment directories");
  rep->add_option("dirs", dirs, "Experiment output directories")->required();
  rep->add_option("--out", report_out, "Write the table to this file");

  auto* cfg_cmd = app.add_subcommand("config", "Print the effective configuration as JSON");
  cfg_cmd->add_option("--config", config_path, "JSON configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*tune) return run_tune(common, mask, kind, budget_mult, repeats, robust, resume);
    if (*val) return run_validate(common, params_file, overrides, n_seeds, master_seed);
    if (*sim) return run_simulate(common, params_file, overrides);
    if (*rep) return run_report(dirs, report_out);
    if (*cfg_cmd) {
      const Config cfg = config_path.empty() ? default_config() : load_config(config_path);
      std::cout << to_json(cfg).dump(2) << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartial;
  }
  return kExitOk;
}
