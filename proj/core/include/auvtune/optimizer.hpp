#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "auvtune/gp.hpp"

namespace auvtune {

/// Outcome of one black-box evaluation: cost j, constraint g and success l.
struct Observation {
  double j = 0.0;
  double g = 0.0;
  bool l = false;
};

/// Evaluation archive (A_k, J_k, G_k, L_k) over the unit box.
class Dataset {
 public:
  explicit Dataset(int dimension) : dim_(dimension) {}

  /// Throws ConfigError for a point outside [0, 1]^d or of wrong size.
  void add(const Eigen::VectorXd& x, const Observation& obs);

  int dimension() const { return dim_; }
  int size() const { return static_cast<int>(obs_.size()); }
  const Eigen::VectorXd& point(int i) const { return points_[static_cast<std::size_t>(i)]; }
  const Observation& observation(int i) const { return obs_[static_cast<std::size_t>(i)]; }
  int success_count() const;

  Eigen::MatrixXd matrix() const;
  /// Smallest Euclidean distance from x to a stored point (inf when empty).
  double distance_to_nearest(const Eigen::VectorXd& x) const;

 private:
  int dim_;
  std::vector<Eigen::VectorXd> points_;
  std::vector<Observation> obs_;
};

enum class BoMode {
  kConstrained,         // min j subject to g <= g_max
  kMinimizeConstraint,  // min g without constraint
};

std::string_view to_string(BoMode mode);
BoMode parse_bo_mode(std::string_view text);

struct BoConfig {
  int dimension = 1;
  int budget = 45;          // evaluations including the initial design
  int initial_design = 0;   // 0 selects max(5, 2 d)
  double g_max = 1.5;
  BoMode mode = BoMode::kConstrained;
  std::uint64_t seed = 1;
  int y_star_samples = 10;
  int y_star_candidates = 512;
  int acquisition_candidates = 2000;
  int refine_starts = 5;
  int refine_iterations = 40;
  double duplicate_tol = 1e-9;
  double feasibility_floor = 1e-12;
  GpFitOptions gp{};
  bool record_wallclock = false;

  int initial_size() const;
  void validate() const;
};

/// Latin hypercube design of n points in [0, 1]^d.
Eigen::MatrixXd initial_design(int d, int n, std::uint64_t seed);

struct Imputation {
  Eigen::VectorXd j;
  Eigen::VectorXd g;
  std::vector<bool> imputed;
  bool all_crashed = false;
};

/// Artificial data for crashed rows: j~ = mu_j + 3 sigma_j and g~ = mu_g
/// from surrogates fitted on the successful rows only. Successful rows pass
/// through. With no successful row nothing is imputed and all_crashed is set.
/// Either model may be null, in which case that column is left as observed.
Imputation impute_crashes(const Dataset& data, const GpModel* gp_j, const GpModel* gp_g);

/// Probability that the constraint model predicts g <= g_max.
double feasibility_probability(double mean, double var, double g_max);

/// Gumbel approximation of the distribution of the constrained minimum over
/// the candidate rows, restricted to rows with PrFeas >= 0.5 (all rows if
/// none). Samples are capped at `best_feasible` when given. `constraint`
/// may be null for unconstrained problems.
std::vector<double> sample_min_values(const GpModel& objective, const GpModel* constraint,
                                      double g_max, int n_samples,
                                      const Eigen::MatrixXd& candidates,
                                      std::optional<double> best_feasible, std::mt19937_64& rng);

/// PrFeas(x) times the max-value entropy search term averaged over y*.
double cmes_acquisition(const GpModel& objective, const GpModel* constraint,
                        const Eigen::VectorXd& x, double g_max, const std::vector<double>& y_star,
                        double feasibility_floor = 1e-12);

/// Same for every row of xs.
Eigen::VectorXd cmes_acquisition(const GpModel& objective, const GpModel* constraint,
                                 const Eigen::MatrixXd& xs, double g_max,
                                 const std::vector<double>& y_star,
                                 double feasibility_floor = 1e-12);

struct Proposal {
  Eigen::VectorXd x;
  double value = 0.0;          // acquisition at x
  double best_candidate = 0.0;  // best acquisition over the raw candidates
};

/// Quasi-random candidates followed by compass-search refinement of the best
/// few; never returns a point within duplicate_tol of the dataset.
Proposal propose_next(const GpModel& objective, const GpModel* constraint, const Dataset& data,
                      const BoConfig& cfg, const std::vector<double>& y_star,
                      std::uint64_t iteration_seed);

using Evaluator = std::function<Observation(const Eigen::VectorXd& x)>;
/// Describes a normalized point in raw parameter units for the history file.
using RawDescriber = std::function<nlohmann::json(const Eigen::VectorXd& x)>;

struct BoResult {
  Dataset data{1};
  int best = -1;  // index into data, -1 when nothing succeeded
  bool feasible = false;
  std::vector<nlohmann::json> history;
};

/// Index of a*: the feasible success with minimal objective, otherwise the
/// success with the smallest constraint violation; -1 without successes.
int best_index(const Dataset& data, BoMode mode, double g_max, bool* feasible = nullptr);

struct OptimizeOptions {
  std::string history_path;  // empty: keep the history in memory only
  bool resume = false;
  RawDescriber describe;
};

/// Constrained BO with crash imputation and cMES. The history is appended
/// one JSON line per evaluation and flushed, so an aborted run leaves a
/// valid prefix that a later call with resume = true continues.
BoResult optimize(const Evaluator& evaluator, const BoConfig& cfg,
                  const OptimizeOptions& options = {});

/// Parses a history file written by optimize() into its records.
std::vector<nlohmann::json> read_history(const std::string& path);

}  // namespace auvtune
