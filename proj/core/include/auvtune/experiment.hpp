#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "auvtune/config.hpp"
#include "auvtune/harness.hpp"
#include "auvtune/optimizer.hpp"
#include "auvtune/params.hpp"

namespace auvtune {

/// Worker count from AUVTUNE_WORKERS, else the hardware concurrency (>= 1).
int worker_count();

/// Runs fn(0) .. fn(n - 1) on up to `workers` threads. The first exception
/// thrown by any job is rethrown after all jobs have stopped.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

enum class StudyKind { kIndividual, kJoint, kAccuracyTier, kCostVariant, kRobust };

std::string_view to_string(StudyKind kind);
StudyKind parse_study_kind(std::string_view text);

struct ExperimentSpec {
  StudyKind kind = StudyKind::kJoint;
  ParamMask mask = ParamMask::kAll;
  std::string tier = "med";
  CostVariant cost = CostVariant::kOriginal;
  bool robust = false;           // evaluate on the configured robust seeds
  int repeats = 5;
  int budget_multiplier = 45;    // budget = multiplier * d
  std::uint64_t seed = 1;        // scenario seed and master seed of the BO repeats
  std::string out_dir;           // empty: nothing is written
  bool resume = false;           // continue existing run histories in out_dir

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Everything needed to evaluate one normalized point of a study.
struct TuningProblem {
  ScenarioConfig scenario;
  ParamSpace space;
  std::vector<std::uint64_t> seeds;  // one entry unless robust
  BoConfig bo;
};

TuningProblem make_problem(const Config& cfg, const ExperimentSpec& spec);

/// Episodes of `a` on every problem seed (concurrently when workers > 1),
/// in seed order.
std::vector<EpisodeResult> evaluate_episodes(const TuningProblem& problem, const GncParams& a,
                                             int workers);

/// Observation of `a`: the single episode, or the robust aggregate.
Observation evaluate(const TuningProblem& problem, const GncParams& a, int workers);

/// BO seed of repeat r.
std::uint64_t repeat_seed(std::uint64_t master, int repeat);

struct RunRecord {
  int repeat = 0;
  std::uint64_t bo_seed = 0;
  bool ok = false;  // false when the run aborted
  std::string error;
  int evaluations = 0;
  int crashes = 0;
  int best = -1;     // index into the history
  bool feasible = false;
  GncParams a_best;
  double j = 0.0;    // values stored in the history at the best index
  double g = 0.0;
};

struct ExperimentReport {
  ExperimentSpec spec;
  int dimension = 0;
  int budget = 0;
  std::vector<RunRecord> runs;
  int best_run = -1;   // index into runs
  int worst_run = -1;

  bool complete() const;
  nlohmann::json to_json() const;
};

/// Runs spec.repeats independent BO runs (in parallel when workers > 1).
/// With an output directory it writes run_<r>/history.jsonl, summary.json,
/// summary.csv and best_trace.csv. Aborted runs are recorded, not thrown.
ExperimentReport run_experiment(const Config& cfg, const ExperimentSpec& spec);

/// Lower-is-better key of a run: j for constrained studies (feasible runs
/// first), g for the minimize-g tier.
bool better_run(const RunRecord& a, const RunRecord& b, BoMode mode);

struct ValidationRow {
  std::uint64_t seed = 0;
  double j = 0.0;
  double g = 0.0;
  bool l = false;
  CrashReason reason = CrashReason::kNone;
  bool violation = false;  // l == 0 or g > g_max
};

struct ValidationReport {
  GncParams params;
  double g_max = 0.0;
  std::vector<ValidationRow> rows;
  int constraint_violations = 0;  // successful episodes with g > g_max
  int crashes = 0;
  double mean_j = 0.0;            // over successful episodes, NaN if none

  int violations() const { return constraint_violations + crashes; }
  nlohmann::json to_json() const;
};

/// Seeds used for validation: master + 1 .. master + n.
std::vector<std::uint64_t> validation_seeds(std::uint64_t master, int n);

/// Runs `a` on n fresh seeds and counts g > g_max and crashes.
ValidationReport validate(const GncParams& a, const ScenarioConfig& scenario, int n_seeds,
                          std::uint64_t master_seed, int workers = 1);

/// Table of best and worst J and g per experiment directory.
std::string format_report(const std::vector<nlohmann::json>& summaries);

nlohmann::json params_json(const GncParams& a);
GncParams params_from_json(const nlohmann::json& j, const GncParams& base);

}  // namespace auvtune
