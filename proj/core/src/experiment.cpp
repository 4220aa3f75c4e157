#include "auvtune/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace auvtune {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kRepeatStream = 0x726570ULL;  // "rep"

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

BoMode mode_of(const Config& cfg, const ExperimentSpec& spec) {
  return cfg.tier(spec.tier).mode;
}

RunRecord summarize_run(const BoResult& bo, const ParamSpace& space, BoMode mode, double g_max) {
  RunRecord r;
  r.evaluations = bo.data.size();
  for (int i = 0; i < bo.data.size(); ++i) r.crashes += bo.data.observation(i).l ? 0 : 1;
  r.best = best_index(bo.data, mode, g_max, &r.feasible);
  if (r.best >= 0) {
    const Observation& o = bo.data.observation(r.best);
    r.a_best = space.denormalize(bo.data.point(r.best));
    r.j = o.j;
    r.g = o.g;
  } else {
    r.a_best = space.base();
    r.j = r.g = kNaN;
  }
  return r;
}

nlohmann::json run_json(const RunRecord& r) {
  return {{"repeat", r.repeat},
          {"bo_seed", r.bo_seed},
          {"ok", r.ok},
          {"error", r.error},
          {"evaluations", r.evaluations},
          {"crashes", r.crashes},
          {"best_index", r.best},
          {"feasible", r.feasible},
          {"a_best", params_json(r.a_best)},
          {"j", number_or_null(r.j)},
          {"g", number_or_null(r.g)}};
}

void write_summary_csv(const ExperimentReport& rep, std::ostream& out) {
  out << "repeat,bo_seed,ok,evaluations,crashes,best_index,feasible,j,g";
  for (int i = 0; i < kParamCount; ++i) out << ',' << param_name(i);
  out << '\n';
  out << std::setprecision(17);
  for (const RunRecord& r : rep.runs) {
    out << r.repeat << ',' << r.bo_seed << ',' << (r.ok ? 1 : 0) << ',' << r.evaluations << ','
        << r.crashes << ',' << r.best << ',' << (r.feasible ? 1 : 0) << ',';
    if (std::isfinite(r.j)) out << r.j;
    out << ',';
    if (std::isfinite(r.g)) out << r.g;
    for (int i = 0; i < kParamCount; ++i) out << ',' << r.a_best[i];
    out << '\n';
  }
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("AUVTUNE_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
    throw ConfigError("AUVTUNE_WORKERS must be a positive integer");
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < n && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string_view to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::kIndividual: return "individual";
    case StudyKind::kJoint: return "joint";
    case StudyKind::kAccuracyTier: return "accuracy-tier";
    case StudyKind::kCostVariant: return "cost-variant";
    case StudyKind::kRobust: return "robust";
  }
  return "joint";
}

StudyKind parse_study_kind(std::string_view text) {
  for (auto k : {StudyKind::kIndividual, StudyKind::kJoint, StudyKind::kAccuracyTier,
                 StudyKind::kCostVariant, StudyKind::kRobust}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown study kind '" + std::string(text) + "'");
}

void ExperimentSpec::validate() const {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (budget_multiplier < 1) throw ConfigError("budget multiplier must be >= 1");
}

TuningProblem make_problem(const Config& cfg, const ExperimentSpec& spec) {
  spec.validate();
  const TierSpec& tier = cfg.tier(spec.tier);
  ScenarioConfig sc = cfg.scenario_for(tier);
  sc.cost = spec.cost;
  sc.seed = spec.seed;
  sc.validate();

  const ParamBounds bounds = default_bounds(tier.r_plan_max);
  GncParams base = cfg.defaults;
  for (int i = 0; i < kParamCount; ++i) base[i] = std::clamp(base[i], bounds.lo[i], bounds.hi[i]);
  ParamSpace space(bounds, mask_indices(spec.mask), base);

  std::vector<std::uint64_t> seeds;
  if (spec.robust) {
    seeds.assign(cfg.experiment.robust_seeds.begin(), cfg.experiment.robust_seeds.end());
  } else {
    seeds.push_back(spec.seed);
  }

  BoConfig bo;
  const auto& o = cfg.optimizer;
  bo.dimension = space.dimension();
  bo.budget = spec.budget_multiplier * bo.dimension;
  bo.g_max = tier.g_max;
  bo.mode = tier.mode;
  bo.y_star_samples = o.y_star_samples;
  bo.y_star_candidates = o.y_star_candidates;
  bo.acquisition_candidates = o.acquisition_candidates;
  bo.refine_starts = o.refine_starts;
  bo.refine_iterations = o.refine_iterations;
  bo.gp.random_starts = o.gp_random_starts;
  bo.gp.refine_top = o.gp_refine_top;
  bo.gp.max_steps = o.gp_max_steps;
  bo.record_wallclock = o.record_wallclock;
  return TuningProblem{std::move(sc), std::move(space), std::move(seeds), bo};
}

std::vector<EpisodeResult> evaluate_episodes(const TuningProblem& problem, const GncParams& a,
                                             int workers) {
  std::vector<EpisodeResult> out(problem.seeds.size());
  parallel_for(static_cast<int>(out.size()), workers, [&](int i) {
    ScenarioConfig sc = problem.scenario;
    sc.seed = problem.seeds[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = run_episode(a, sc);
  });
  return out;
}

Observation evaluate(const TuningProblem& problem, const GncParams& a, int workers) {
  const auto results = evaluate_episodes(problem, a, workers);
  const Aggregate agg = robust_aggregate(results);
  return Observation{agg.j, agg.g, agg.l};
}

std::uint64_t repeat_seed(std::uint64_t master, int repeat) {
  return make_stream(master, kRepeatStream + static_cast<std::uint64_t>(repeat))();
}

bool better_run(const RunRecord& a, const RunRecord& b, BoMode mode) {
  const bool va = a.best >= 0, vb = b.best >= 0;
  if (va != vb) return va;
  if (!va) return false;
  if (mode == BoMode::kMinimizeConstraint) return a.g < b.g;
  if (a.feasible != b.feasible) return a.feasible;
  return a.feasible ? a.j < b.j : a.g < b.g;
}

bool ExperimentReport::complete() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.ok; });
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json runs_json = nlohmann::json::array();
  for (const RunRecord& r : runs) runs_json.push_back(run_json(r));
  auto pick = [&](int idx) {
    return idx >= 0 ? run_json(runs[static_cast<std::size_t>(idx)]) : nlohmann::json(nullptr);
  };
  return {{"spec",
           {{"kind", auvtune::to_string(spec.kind)},
            {"mask", auvtune::to_string(spec.mask)},
            {"tier", spec.tier},
            {"cost", auvtune::to_string(spec.cost)},
            {"robust", spec.robust},
            {"repeats", spec.repeats},
            {"budget_multiplier", spec.budget_multiplier},
            {"seed", spec.seed}}},
          {"dimension", dimension},
          {"budget", budget},
          {"complete", complete()},
          {"runs", runs_json},
          {"best_run", pick(best_run)},
          {"worst_run", pick(worst_run)}};
}

ExperimentReport run_experiment(const Config& cfg, const ExperimentSpec& spec) {
  const TuningProblem problem = make_problem(cfg, spec);
  const BoMode mode = mode_of(cfg, spec);
  const int workers = worker_count();
  const int repeat_workers = std::min(workers, spec.repeats);
  const int episode_workers = std::max(1, workers / repeat_workers);

  namespace fs = std::filesystem;
  if (!spec.out_dir.empty()) fs::create_directories(spec.out_dir);

  ExperimentReport rep;
  rep.spec = spec;
  rep.dimension = problem.space.dimension();
  rep.budget = problem.bo.budget;
  rep.runs.resize(static_cast<std::size_t>(spec.repeats));

  parallel_for(spec.repeats, repeat_workers, [&](int r) {
    RunRecord& rec = rep.runs[static_cast<std::size_t>(r)];
    rec.repeat = r;
    rec.bo_seed = repeat_seed(spec.seed, r);
    BoConfig bo = problem.bo;
    bo.seed = rec.bo_seed;
    OptimizeOptions opt;
    if (!spec.out_dir.empty()) {
      const fs::path dir = fs::path(spec.out_dir) / ("run_" + std::to_string(r));
      fs::create_directories(dir);
      opt.history_path = (dir / "history.jsonl").string();
      opt.resume = spec.resume && fs::exists(opt.history_path);
    }
    opt.describe = [&](const Eigen::VectorXd& x) {
      return params_json(problem.space.denormalize(x));
    };
    const Evaluator evaluator = [&](const Eigen::VectorXd& x) {
      return evaluate(problem, problem.space.denormalize(x), episode_workers);
    };
    try {
      const BoResult bo_result = optimize(evaluator, bo, opt);
      const auto seed = rec.bo_seed;
      rec = summarize_run(bo_result, problem.space, mode, bo.g_max);
      rec.repeat = r;
      rec.bo_seed = seed;
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
      rec.a_best = problem.space.base();
      rec.j = rec.g = kNaN;
      if (!opt.history_path.empty()) {
        const auto hist = read_history(opt.history_path);
        rec.evaluations = static_cast<int>(hist.size());
      }
    }
  });

  for (int r = 0; r < spec.repeats; ++r) {
    const RunRecord& cand = rep.runs[static_cast<std::size_t>(r)];
    if (cand.best < 0) continue;
    if (rep.best_run < 0 || better_run(cand, rep.runs[static_cast<std::size_t>(rep.best_run)], mode)) {
      rep.best_run = r;
    }
    if (rep.worst_run < 0 || better_run(rep.runs[static_cast<std::size_t>(rep.worst_run)], cand, mode)) {
      rep.worst_run = r;
    }
  }

  if (!spec.out_dir.empty()) {
    const fs::path dir(spec.out_dir);
    std::ofstream(dir / "summary.json") << rep.to_json().dump(2) << '\n';
    std::ofstream csv(dir / "summary.csv");
    write_summary_csv(rep, csv);
    if (rep.best_run >= 0) {
      ScenarioConfig sc = problem.scenario;
      sc.seed = problem.seeds.front();
      const EpisodeResult ep = run_episode(rep.runs[static_cast<std::size_t>(rep.best_run)].a_best, sc);
      std::ofstream trace(dir / "best_trace.csv");
      write_trace_csv(ep.trace, trace);
    }
  }
  return rep;
}

std::vector<std::uint64_t> validation_seeds(std::uint64_t master, int n) {
  std::vector<std::uint64_t> seeds;
  for (int i = 1; i <= n; ++i) seeds.push_back(master + static_cast<std::uint64_t>(i));
  return seeds;
}

ValidationReport validate(const GncParams& a, const ScenarioConfig& scenario, int n_seeds,
                          std::uint64_t master_seed, int workers) {
  if (n_seeds < 0) throw ConfigError("number of validation seeds must be >= 0");
  ValidationReport rep;
  rep.params = a;
  rep.g_max = scenario.g_max;
  const auto seeds = validation_seeds(master_seed, n_seeds);
  rep.rows.resize(seeds.size());
  parallel_for(n_seeds, workers, [&](int i) {
    ScenarioConfig sc = scenario;
    sc.seed = seeds[static_cast<std::size_t>(i)];
    const EpisodeResult ep = run_episode(a, sc);
    ValidationRow& row = rep.rows[static_cast<std::size_t>(i)];
    row.seed = sc.seed;
    row.j = ep.j;
    row.g = ep.g;
    row.l = ep.l;
    row.reason = ep.reason;
    row.violation = !ep.l || ep.g > scenario.g_max;
  });
  double sum = 0.0;
  int ok = 0;
  for (const ValidationRow& row : rep.rows) {
    if (!row.l) {
      ++rep.crashes;
    } else {
      ++ok;
      sum += row.j;
      if (row.g > scenario.g_max) ++rep.constraint_violations;
    }
  }
  rep.mean_j = ok > 0 ? sum / ok : kNaN;
  return rep;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const ValidationRow& r : rows) {
    rows_json.push_back({{"seed", r.seed},
                         {"j", number_or_null(r.j)},
                         {"g", number_or_null(r.g)},
                         {"l", r.l ? 1 : 0},
                         {"reason", auvtune::to_string(r.reason)},
                         {"violation", r.violation}});
  }
  return {{"params", params_json(params)},
          {"g_max", g_max},
          {"seeds", rows.size()},
          {"constraint_violations", constraint_violations},
          {"crashes", crashes},
          {"violations", violations()},
          {"mean_j", number_or_null(mean_j)},
          {"rows", rows_json}};
}

std::string format_report(const std::vector<nlohmann::json>& summaries) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "study" << std::setw(9) << "mask" << std::setw(6) << "tier"
      << std::setw(11) << "cost" << std::setw(4) << "d" << std::setw(8) << "budget" << std::right
      << std::setw(12) << "best J" << std::setw(12) << "worst J" << std::setw(10) << "best g"
      << std::setw(10) << "worst g" << '\n';
  auto cell = [&](const nlohmann::json& run, const char* key, int width) {
    if (run.is_object() && run.at(key).is_number()) {
      out << std::setw(width) << std::fixed << std::setprecision(3) << run.at(key).get<double>();
    } else {
      out << std::setw(width) << "-";
    }
  };
  for (const auto& s : summaries) {
    const auto& spec = s.at("spec");
    out << std::left << std::setw(14) << spec.at("kind").get<std::string>() << std::setw(9)
        << spec.at("mask").get<std::string>() << std::setw(6) << spec.at("tier").get<std::string>()
        << std::setw(11) << spec.at("cost").get<std::string>() << std::setw(4)
        << s.at("dimension").get<int>() << std::setw(8) << s.at("budget").get<int>() << std::right;
    cell(s.at("best_run"), "j", 12);
    cell(s.at("worst_run"), "j", 12);
    cell(s.at("best_run"), "g", 10);
    cell(s.at("worst_run"), "g", 10);
    out << '\n';
  }
  return out.str();
}

nlohmann::json params_json(const GncParams& a) {
  nlohmann::json j = nlohmann::json::object();
  for (int i = 0; i < kParamCount; ++i) j[std::string(param_name(i))] = a[i];
  return j;
}

GncParams params_from_json(const nlohmann::json& j, const GncParams& base) {
  if (!j.is_object()) throw ConfigError("parameters must be a JSON object");
  GncParams a = base;
  for (const auto& item : j.items()) {
    const int i = param_index(item.key());
    if (i < 0) throw ConfigError("unknown parameter '" + item.key() + "'");
    if (!item.value().is_number()) throw ConfigError("parameter '" + item.key() + "' must be a number");
    a[i] = item.value().get<double>();
  }
  return a;
}

}  // namespace auvtune
