#include "auvtune/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "auvtune/common.hpp"
#include "auvtune/normal.hpp"
#include "auvtune/sampling.hpp"

namespace auvtune {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigmaFloor = 1e-12;

enum SeedTag : std::uint64_t {
  kTagFitObjective = 1,
  kTagFitConstraint,
  kTagFitImputedObjective,
  kTagFitImputedConstraint,
  kTagYStar,
  kTagPropose,
  kTagSpaceFilling,
};

std::uint64_t derive_seed(std::uint64_t seed, int iteration, SeedTag tag) {
  return make_stream(seed, (static_cast<std::uint64_t>(iteration) << 8) | tag)();
}

// Values of one column with crashed rows replaced by mu + kappa * sigma.
Eigen::VectorXd impute_column(const Dataset& data, const GpModel& model, double kappa,
                              bool use_j) {
  Eigen::VectorXd out(data.size());
  for (int i = 0; i < data.size(); ++i) {
    const Observation& o = data.observation(i);
    if (o.l) {
      out[i] = use_j ? o.j : o.g;
    } else {
      const auto [mu, var] = model.predict_point(data.point(i));
      out[i] = mu + kappa * std::sqrt(var);
    }
  }
  return out;
}

nlohmann::json hyper_json(const GpModel& m) {
  nlohmann::json h;
  h["log_signal_var"] = m.hyper().log_signal_var;
  h["log_lengthscale"] = std::vector<double>(m.hyper().log_lengthscale.data(),
                                             m.hyper().log_lengthscale.data() +
                                                 m.hyper().log_lengthscale.size());
  h["mean"] = m.hyper().mean;
  h["y_offset"] = m.y_offset();
  h["y_scale"] = m.y_scale();
  return h;
}

std::optional<GpHyper> hyper_from_json(const nlohmann::json& h) {
  if (!h.is_object()) return std::nullopt;
  GpHyper g;
  g.log_signal_var = h.at("log_signal_var").get<double>();
  const auto ell = h.at("log_lengthscale").get<std::vector<double>>();
  g.log_lengthscale = Eigen::Map<const Eigen::VectorXd>(ell.data(), static_cast<Eigen::Index>(ell.size()));
  g.mean = h.at("mean").get<double>();
  return g;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_or_nan(const nlohmann::json& v) { return v.is_number() ? v.get<double>() : kNaN; }

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Largest minimum distance to the data among quasi-random candidates.
Eigen::VectorXd space_filling_point(const Dataset& data, int n_candidates, std::uint64_t seed) {
  const Eigen::MatrixXd c = halton(n_candidates, data.dimension(), random_shift(data.dimension(), seed));
  int best = 0;
  double best_d = -1.0;
  for (int i = 0; i < c.rows(); ++i) {
    const double d = data.distance_to_nearest(c.row(i).transpose());
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  return c.row(best).transpose();
}

}  // namespace

void Dataset::add(const Eigen::VectorXd& x, const Observation& obs) {
  if (x.size() != dim_) throw ConfigError("dataset point has the wrong dimension");
  if (!x.allFinite() || x.minCoeff() < 0.0 || x.maxCoeff() > 1.0) {
    throw ConfigError("dataset points must lie in the unit box");
  }
  points_.push_back(x);
  obs_.push_back(obs);
}

int Dataset::success_count() const {
  return static_cast<int>(std::count_if(obs_.begin(), obs_.end(), [](const Observation& o) { return o.l; }));
}

Eigen::MatrixXd Dataset::matrix() const {
  Eigen::MatrixXd m(size(), dim_);
  for (int i = 0; i < size(); ++i) m.row(i) = points_[static_cast<std::size_t>(i)].transpose();
  return m;
}

double Dataset::distance_to_nearest(const Eigen::VectorXd& x) const {
  double best = kInf;
  for (const auto& p : points_) best = std::min(best, (p - x).norm());
  return best;
}

std::string_view to_string(BoMode mode) {
  return mode == BoMode::kMinimizeConstraint ? "min_g" : "constrained";
}

BoMode parse_bo_mode(std::string_view text) {
  if (text == "constrained") return BoMode::kConstrained;
  if (text == "min_g") return BoMode::kMinimizeConstraint;
  throw ConfigError("unknown optimization mode '" + std::string(text) + "'");
}

int BoConfig::initial_size() const {
  return initial_design > 0 ? initial_design : std::max(5, 2 * dimension);
}

void BoConfig::validate() const {
  if (dimension < 1) throw ConfigError("BO dimension must be positive");
  if (initial_size() < 2) throw ConfigError("initial design needs at least two points");
  if (budget < initial_size()) throw ConfigError("budget must cover the initial design");
  if (!(g_max > 0.0)) throw ConfigError("g_max must be positive");
  if (y_star_samples < 1 || y_star_candidates < 1 || acquisition_candidates < 1 ||
      refine_starts < 0 || refine_iterations < 0) {
    throw ConfigError("invalid acquisition settings");
  }
}

Eigen::MatrixXd initial_design(int d, int n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("initial design needs n >= 2");
  return latin_hypercube(n, d, seed);
}

Imputation impute_crashes(const Dataset& data, const GpModel* gp_j, const GpModel* gp_g) {
  Imputation imp;
  imp.j.resize(data.size());
  imp.g.resize(data.size());
  imp.imputed.assign(static_cast<std::size_t>(data.size()), false);
  for (int i = 0; i < data.size(); ++i) {
    imp.j[i] = data.observation(i).j;
    imp.g[i] = data.observation(i).g;
  }
  if (data.success_count() == 0) {
    imp.all_crashed = data.size() > 0;
    return imp;
  }
  if (gp_j) imp.j = impute_column(data, *gp_j, 3.0, true);
  if (gp_g) imp.g = impute_column(data, *gp_g, 0.0, false);
  for (int i = 0; i < data.size(); ++i) imp.imputed[static_cast<std::size_t>(i)] = !data.observation(i).l;
  return imp;
}

double feasibility_probability(double mean, double var, double g_max) {
  const double sd = std::sqrt(std::max(var, 0.0));
  if (sd < kSigmaFloor) return mean <= g_max ? 1.0 : 0.0;
  return normal::cdf((g_max - mean) / sd);
}

std::vector<double> sample_min_values(const GpModel& objective, const GpModel* constraint,
                                      double g_max, int n_samples,
                                      const Eigen::MatrixXd& candidates,
                                      std::optional<double> best_feasible, std::mt19937_64& rng) {
  std::vector<double> out;
  if (n_samples <= 0 || candidates.rows() == 0) return out;
  const GpPrediction pj = objective.predict(candidates);
  std::vector<Eigen::Index> keep;
  if (constraint) {
    const GpPrediction pg = constraint->predict(candidates);
    for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
      if (feasibility_probability(pg.mean[i], pg.var[i], g_max) >= 0.5) keep.push_back(i);
    }
  }
  if (keep.empty()) {
    keep.resize(static_cast<std::size_t>(candidates.rows()));
    std::iota(keep.begin(), keep.end(), Eigen::Index{0});
  }

  // Work with the maximum of -f: P[max < y] = prod Phi((y - m_i) / s_i).
  std::vector<double> m, s;
  for (Eigen::Index i : keep) {
    m.push_back(-pj.mean[i]);
    s.push_back(std::sqrt(pj.var[i]));
  }
  auto log_cdf_max = [&](double y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (s[i] < kSigmaFloor) {
        if (y < m[i]) return -kInf;
      } else {
        acc += normal::log_cdf((y - m[i]) / s[i]);
      }
    }
    return acc;
  };
  double top = -kInf, spread = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    top = std::max(top, m[i] + 6.0 * s[i]);
    spread = std::max(spread, s[i]);
  }
  const double m_max = *std::max_element(m.begin(), m.end());
  auto quantile = [&](double q) {
    const double target = std::log(q);
    double hi = std::max(top, m_max);
    double step = 1.0 + spread + std::abs(hi);
    while (log_cdf_max(hi) < target) {
      hi += step;
      step *= 2.0;
    }
    double lo = m_max - step;
    while (log_cdf_max(lo) > target) {
      lo -= step;
      step *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (log_cdf_max(mid) < target ? lo : hi) = mid;
    }
    return hi;
  };
  const double y1 = quantile(0.25);
  const double y2 = quantile(0.5);
  const double y3 = quantile(0.75);
  // Gumbel P[max < y] = exp(-exp(-(y - a) / b)).
  double b = (y3 - y1) / (std::log(-std::log(0.25)) - std::log(-std::log(0.75)));
  if (!(b > 0.0) || !std::isfinite(b)) b = 0.0;
  const double a = y2 + b * std::log(std::log(2.0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < n_samples; ++k) {
    const double r = std::clamp(u(rng), 1e-12, 1.0 - 1e-12);
    double y_star = -(a - b * std::log(-std::log(r)));
    if (best_feasible) y_star = std::min(y_star, *best_feasible);
    out.push_back(y_star);
  }
  return out;
}

Eigen::VectorXd cmes_acquisition(const GpModel& objective, const GpModel* constraint,
                                 const Eigen::MatrixXd& xs, double g_max,
                                 const std::vector<double>& y_star, double feasibility_floor) {
  const GpPrediction pj = objective.predict(xs);
  GpPrediction pg;
  if (constraint) pg = constraint->predict(xs);
  Eigen::VectorXd out(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const double pf = constraint ? feasibility_probability(pg.mean[i], pg.var[i], g_max) : 1.0;
    const double sd = std::sqrt(pj.var[i]);
    double info = 0.0;
    if (sd >= kSigmaFloor && !y_star.empty()) {
      for (double y : y_star) {
        const double gamma = (pj.mean[i] - y) / sd;
        info += 0.5 * gamma * normal::inverse_mills(gamma) - normal::log_cdf(gamma);
      }
      info = std::max(0.0, info / static_cast<double>(y_star.size()));
    }
    out[i] = std::max(pf, feasibility_floor) * info;
  }
  return out;
}

double cmes_acquisition(const GpModel& objective, const GpModel* constraint,
                        const Eigen::VectorXd& x, double g_max, const std::vector<double>& y_star,
                        double feasibility_floor) {
  return cmes_acquisition(objective, constraint, Eigen::MatrixXd(x.transpose()), g_max, y_star,
                          feasibility_floor)[0];
}

Proposal propose_next(const GpModel& objective, const GpModel* constraint, const Dataset& data,
                      const BoConfig& cfg, const std::vector<double>& y_star,
                      std::uint64_t iteration_seed) {
  const int d = data.dimension();
  const Eigen::MatrixXd cands =
      halton(cfg.acquisition_candidates, d, random_shift(d, iteration_seed));
  const Eigen::VectorXd acq =
      cmes_acquisition(objective, constraint, cands, cfg.g_max, y_star, cfg.feasibility_floor);
  auto fresh = [&](const Eigen::VectorXd& x) {
    return data.distance_to_nearest(x) > cfg.duplicate_tol;
  };

  std::vector<Eigen::Index> order(static_cast<std::size_t>(cands.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return acq[a] > acq[b]; });

  Proposal best;
  best.value = -kInf;
  best.best_candidate = -kInf;
  std::vector<Eigen::Index> starts;
  for (Eigen::Index i : order) {
    if (!fresh(cands.row(i).transpose())) continue;
    if (starts.empty()) {
      best.x = cands.row(i).transpose();
      best.value = acq[i];
      best.best_candidate = acq[i];
    }
    starts.push_back(i);
    if (static_cast<int>(starts.size()) >= std::max(1, cfg.refine_starts)) break;
  }

  if (cfg.refine_starts > 0) {
    for (Eigen::Index i : starts) {
      Eigen::VectorXd x = cands.row(i).transpose();
      double fx = acq[i];
      double h = 0.05;
      for (int it = 0; it < cfg.refine_iterations && h >= 1e-4; ++it) {
        Eigen::MatrixXd nb(2 * d, d);
        for (int k = 0; k < d; ++k) {
          nb.row(2 * k) = x.transpose();
          nb.row(2 * k + 1) = x.transpose();
          nb(2 * k, k) = std::min(1.0, x[k] + h);
          nb(2 * k + 1, k) = std::max(0.0, x[k] - h);
        }
        const Eigen::VectorXd v =
            cmes_acquisition(objective, constraint, nb, cfg.g_max, y_star, cfg.feasibility_floor);
        Eigen::Index arg = -1;
        double val = fx;
        for (Eigen::Index r = 0; r < nb.rows(); ++r) {
          if (v[r] > val && fresh(nb.row(r).transpose())) {
            val = v[r];
            arg = r;
          }
        }
        if (arg >= 0) {
          x = nb.row(arg).transpose();
          fx = val;
        } else {
          h *= 0.5;
        }
      }
      if (fx > best.value) {
        best.value = fx;
        best.x = x;
      }
    }
  }

  if (best.x.size() == 0) {
    auto rng = make_stream(iteration_seed, 0x72616e64ULL);  // "rand"
    Eigen::VectorXd x(d);
    do {
      for (int k = 0; k < d; ++k) x[k] = uniform01(rng);
    } while (!fresh(x));
    best.x = x;
    best.value = cmes_acquisition(objective, constraint, x, cfg.g_max, y_star, cfg.feasibility_floor);
    best.best_candidate = best.value;
  }
  return best;
}

int best_index(const Dataset& data, BoMode mode, double g_max, bool* feasible) {
  int best = -1;
  double best_value = kInf;
  bool found_feasible = false;
  for (int i = 0; i < data.size(); ++i) {
    const Observation& o = data.observation(i);
    if (!o.l) continue;
    const double value = mode == BoMode::kConstrained ? o.j : o.g;
    if (mode == BoMode::kMinimizeConstraint || o.g <= g_max) {
      if (!found_feasible || value < best_value) {
        best = i;
        best_value = value;
      }
      found_feasible = true;
    }
  }
  if (!found_feasible) {
    double least_violation = kInf;
    for (int i = 0; i < data.size(); ++i) {
      const Observation& o = data.observation(i);
      if (o.l && o.g - g_max < least_violation) {
        least_violation = o.g - g_max;
        best = i;
      }
    }
  }
  if (feasible) *feasible = found_feasible;
  return best;
}

std::vector<nlohmann::json> read_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open history file " + path);
  std::vector<nlohmann::json> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("history line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

BoResult optimize(const Evaluator& evaluator, const BoConfig& cfg,
                  const OptimizeOptions& options) {
  cfg.validate();
  const int d = cfg.dimension;
  const bool constrained = cfg.mode == BoMode::kConstrained;
  BoResult result;
  result.data = Dataset(d);
  Dataset& data = result.data;
  std::optional<GpHyper> warm_objective, warm_constraint;

  if (options.resume && !options.history_path.empty() && std::ifstream(options.history_path)) {
    for (const auto& rec : read_history(options.history_path)) {
      const auto a = rec.at("a_normalized").get<std::vector<double>>();
      if (static_cast<int>(a.size()) != d) throw ConfigError("history dimension mismatch");
      Observation o;
      o.l = rec.at("l").get<int>() != 0;
      o.j = number_or_nan(rec.at("j"));
      o.g = number_or_nan(rec.at("g"));
      data.add(Eigen::Map<const Eigen::VectorXd>(a.data(), d), o);
      const auto& h = rec.at("hyperparams");
      if (h.is_object()) {
        warm_objective = hyper_from_json(h.at("objective"));
        warm_constraint = h.contains("constraint") ? hyper_from_json(h.at("constraint")) : std::nullopt;
      }
      result.history.push_back(rec);
    }
  }

  std::ofstream out;
  if (!options.history_path.empty()) {
    out.open(options.history_path, options.resume ? std::ios::app : std::ios::trunc);
    if (!out) throw ConfigError("cannot write history file " + options.history_path);
  }

  const int n_init = cfg.initial_size();
  const Eigen::MatrixXd design = initial_design(d, n_init, cfg.seed);

  while (data.size() < cfg.budget) {
    const int iter = data.size();
    Eigen::VectorXd x;
    nlohmann::json hyper = nullptr;
    nlohmann::json acquisition = nullptr;
    std::vector<bool> imputed(static_cast<std::size_t>(iter), false);

    if (iter < n_init) {
      x = design.row(iter).transpose();
    } else if (data.success_count() == 0) {
      x = space_filling_point(data, cfg.acquisition_candidates,
                              derive_seed(cfg.seed, iter, kTagSpaceFilling));
    } else {
      std::vector<int> ok;
      for (int i = 0; i < iter; ++i) {
        if (data.observation(i).l) ok.push_back(i);
        imputed[static_cast<std::size_t>(i)] = !data.observation(i).l;
      }
      Eigen::MatrixXd xs(static_cast<Eigen::Index>(ok.size()), d);
      Eigen::VectorXd ys_obj(xs.rows()), ys_con(xs.rows());
      for (std::size_t r = 0; r < ok.size(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        xs.row(row) = data.point(ok[r]).transpose();
        const Observation& o = data.observation(ok[r]);
        ys_obj[row] = constrained ? o.j : o.g;
        ys_con[row] = o.g;
      }
      GpFitOptions fit = cfg.gp;
      fit.seed = derive_seed(cfg.seed, iter, kTagFitObjective);
      fit.warm_start = warm_objective;
      GpModel obj = GpModel::fit(xs, ys_obj, fit);
      std::optional<GpModel> con;
      if (constrained) {
        fit.seed = derive_seed(cfg.seed, iter, kTagFitConstraint);
        fit.warm_start = warm_constraint;
        con = GpModel::fit(xs, ys_con, fit);
      }
      if (static_cast<int>(ok.size()) < iter) {
        const Eigen::MatrixXd all = data.matrix();
        const Eigen::VectorXd obj_imp = impute_column(data, obj, 3.0, constrained);
        fit.seed = derive_seed(cfg.seed, iter, kTagFitImputedObjective);
        fit.warm_start = obj.hyper();
        obj = GpModel::fit(all, obj_imp, fit);
        if (constrained) {
          const Eigen::VectorXd con_imp = impute_column(data, *con, 0.0, false);
          fit.seed = derive_seed(cfg.seed, iter, kTagFitImputedConstraint);
          fit.warm_start = con->hyper();
          con = GpModel::fit(all, con_imp, fit);
        }
      }

      std::optional<double> best_feasible;
      for (int i : ok) {
        const Observation& o = data.observation(i);
        const double v = constrained ? o.j : o.g;
        if (!constrained || o.g <= cfg.g_max) {
          best_feasible = best_feasible ? std::min(*best_feasible, v) : v;
        }
      }
      auto y_rng = make_stream(derive_seed(cfg.seed, iter, kTagYStar), 0);
      Eigen::MatrixXd ycand(cfg.y_star_candidates + iter, d);
      ycand.topRows(cfg.y_star_candidates) =
          halton(cfg.y_star_candidates, d, random_shift(d, derive_seed(cfg.seed, iter, kTagYStar)));
      ycand.bottomRows(iter) = data.matrix();
      const GpModel* con_ptr = con ? &*con : nullptr;
      const auto y_star = sample_min_values(obj, con_ptr, cfg.g_max, cfg.y_star_samples, ycand,
                                            best_feasible, y_rng);
      const Proposal p = propose_next(obj, con_ptr, data, cfg, y_star,
                                      derive_seed(cfg.seed, iter, kTagPropose));
      x = p.x;
      acquisition = p.value;
      hyper = nlohmann::json::object();
      hyper["objective"] = hyper_json(obj);
      if (con) hyper["constraint"] = hyper_json(*con);
      warm_objective = obj.hyper();
      if (con) warm_constraint = con->hyper();
    }

    const auto t0 = std::chrono::steady_clock::now();
    Observation obs = evaluator(x);
    const auto t1 = std::chrono::steady_clock::now();
    if (obs.l && (!std::isfinite(obs.j) || !std::isfinite(obs.g))) obs.l = false;
    if (!obs.l) obs.j = obs.g = kNaN;
    data.add(x, obs);

    nlohmann::json rec;
    rec["iter"] = iter;
    rec["a_raw"] = options.describe ? options.describe(x) : nlohmann::json(to_std(x));
    rec["a_normalized"] = to_std(x);
    rec["j"] = number_or_null(obs.j);
    rec["g"] = number_or_null(obs.g);
    rec["l"] = obs.l ? 1 : 0;
    rec["imputed_flags"] = imputed;
    rec["hyperparams"] = hyper;
    rec["acquisition"] = acquisition;
    rec["wallclock"] = cfg.record_wallclock
                           ? nlohmann::json(std::chrono::duration<double>(t1 - t0).count())
                           : nlohmann::json(nullptr);
    if (out.is_open()) {
      out << rec.dump() << '\n';
      out.flush();
    }
    result.history.push_back(std::move(rec));
  }

  result.best = best_index(data, cfg.mode, cfg.g_max, &result.feasible);
  return result;
}

}  // namespace auvtune
