// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any requested criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "auvtune/config.hpp"
#include "auvtune/controller.hpp"
#include "auvtune/experiment.hpp"
#include "auvtune/gp.hpp"
#include "auvtune/harness.hpp"
#include "auvtune/optimizer.hpp"
#include "auvtune/planner.hpp"
#include "auvtune/ukf.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace auvtune;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Eigen::MatrixXd uniform(std::mt19937_64& rng, int n, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

// ------------------------------------------------------------------ 1: GP

Outcome gp_oracle() {
  std::mt19937_64 rng(101);
  double worst_mean = 0.0, worst_var = 0.0, worst_grad = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 5, d = 1 + trial % 3;
    const Eigen::MatrixXd x = uniform(rng, n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = std::sin(3.0 * x(i, 0)) + x.row(i).sum();
    Eigen::VectorXd ell = Eigen::VectorXd::Constant(d, 0.15);
    ell[0] = 0.1;
    GpHyper h;
    h.log_signal_var = std::log(1.3);
    h.log_lengthscale = ell.array().log();
    h.mean = 0.2;
    const GpModel m = GpModel::condition(x, y, h);
    const Eigen::MatrixXd xs = uniform(rng, 5, d);
    const GpPrediction p = m.predict(xs);
    const Eigen::VectorXd z = (y.array() - m.y_offset()) / m.y_scale();
    const auto o = oracle::gp_posterior(x, z, xs, 1.3, ell, 0.2, m.jitter() * 1.3);
    for (int q = 0; q < xs.rows(); ++q) {
      const double mean = m.y_offset() + m.y_scale() * o.mean[q];
      const double var = m.y_scale() * m.y_scale() * o.var[q];
      worst_mean = std::max(worst_mean, std::abs(p.mean[q] - mean));
      worst_var = std::max(worst_var, std::abs(p.var[q] - var));
    }
  }
  const HyperPrior prior;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 3;
    const Eigen::MatrixXd x = uniform(rng, 5, d);
    Eigen::VectorXd y(5);
    for (int i = 0; i < 5; ++i) y[i] = std::cos(4.0 * x(i, 0)) + x.row(i).squaredNorm();
    y = (y.array() - y.mean()) / std::sqrt((y.array() - y.mean()).square().mean());
    std::uniform_real_distribution<double> u(-1.0, 0.5), log_ell(-3.0, -1.5);
    Eigen::VectorXd theta(d + 2);
    for (int i = 0; i < theta.size(); ++i) theta[i] = u(rng);
    for (int i = 1; i <= d; ++i) theta[i] = log_ell(rng);
    const LmlResult r = log_marginal_likelihood(x, y, GpHyper::from_vector(theta), prior, true);
    Eigen::VectorXd fd(theta.size());
    const double step = 1e-5;
    for (int i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd up = theta, down = theta;
      up[i] += step;
      down[i] -= step;
      fd[i] = (log_marginal_likelihood(x, y, GpHyper::from_vector(up), prior, false).value -
               log_marginal_likelihood(x, y, GpHyper::from_vector(down), prior, false).value) /
              (2.0 * step);
    }
    worst_grad = std::max(worst_grad, (r.gradient - fd).norm() / fd.norm());
  }
  return {worst_mean <= 1e-10 && worst_var <= 1e-10 && worst_grad <= 1e-4,
          "max |dmean| " + fmt(worst_mean) + ", max |dvar| " + fmt(worst_var) +
              ", max rel gradient error " + fmt(worst_grad)};
}

// ----------------------------------------------------------------- 2: UKF

Outcome ukf_oracle() {
  constexpr int N = 4;
  const double dt = 0.1;
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix4d q = Eigen::Vector4d(1e-3, 1e-3, 1e-2, 1e-2).asDiagonal();
  const Eigen::Matrix2d r = 0.25 * Eigen::Matrix2d::Identity();
  ukf::Gaussian<N> u;
  u.mean << 0.0, 0.0, 1.0, 0.5;
  u.cov = Eigen::Vector4d(1.0, 1.0, 0.5, 0.5).asDiagonal();
  oracle::Gaussian k{u.mean, u.cov};
  std::mt19937_64 rng(102);
  std::normal_distribution<double> noise(0.0, 0.5);
  Eigen::Vector4d truth(0.0, 0.0, 1.0, 0.5);
  double worst = 0.0;
  auto track = [&] {
    worst = std::max(worst, (u.mean - k.mean).cwiseAbs().maxCoeff());
    worst = std::max(worst, (u.cov - k.cov).cwiseAbs().maxCoeff());
  };
  for (int step = 0; step < 100; ++step) {
    truth = f * truth;
    u = ukf::predict<N>(u, [&](const Eigen::Vector4d& x) { return Eigen::Vector4d(f * x); }, q, {},
                        {});
    k = oracle::kf_predict(k, f, q);
    track();
    const Eigen::Vector2d z = h * truth + Eigen::Vector2d(noise(rng), noise(rng));
    u = ukf::correct<N, 2>(
        u, z, [&](const Eigen::Vector4d& x) { return Eigen::Vector2d(h * x); }, r, {}, {}, {});
    k = oracle::kf_update(k, h, r, z);
    track();
  }
  return {worst <= 1e-6, "max abs error over 100 steps " + fmt(worst)};
}

// -------------------------------------------------------------- 3: Dubins

Outcome dubins_optimality() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> radius(0.5, 10.0), ang(-kPi, kPi);
  double worst = 0.0;
  int below_euclid = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double r = radius(rng);
    const double extent = trial % 2 == 0 ? 3.0 * r : 20.0 * r;
    std::uniform_real_distribution<double> pos(-extent, extent);
    const Pose2 s{pos(rng), pos(rng), ang(rng)}, g{pos(rng), pos(rng), ang(rng)};
    const double len = dubins_shortest(s, g, r).length();
    const double expect =
        oracle::dubins_min_length({s.n, s.e, s.psi}, {g.n, g.e, g.psi}, r);
    worst = std::max(worst, std::abs(len - expect) / std::max(1.0, expect));
    if (len < std::hypot(g.n - s.n, g.e - s.e) - 1e-9) ++below_euclid;
  }
  return {worst <= 1e-9 && below_euclid == 0,
          "max scaled error " + fmt(worst) + ", shorter than Euclidean: " +
              std::to_string(below_euclid)};
}

// ----------------------------------------------------------------- 4: LQR

Outcome lqr_soundness() {
  std::mt19937_64 rng(104);
  std::normal_distribution<double> n01;
  double worst_res = 0.0, worst_rho = 0.0;
  int failures = 0;
  auto check = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                   const Eigen::MatrixXd& r) {
    try {
      const LqrSolution sol = lqr_gain(a, b, q, r);
      worst_res = std::max(worst_res, dare_residual(a, b, q, r, sol.riccati));
      worst_rho = std::max(worst_rho, spectral_radius(a - b * sol.gain));
    } catch (const CrashSignal&) {
      ++failures;
    }
  };
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 7, m = 1 + trial % 3;
    Eigen::MatrixXd a(n, n), b(n, m);
    for (int i = 0; i < a.size(); ++i) a.data()[i] = n01(rng) / std::sqrt(n);
    for (int i = 0; i < b.size(); ++i) b.data()[i] = n01(rng);
    check(a, b, Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(m, m));
  }
  const PlantModel design(default_hydro_params());
  for (double u_ref : {0.2, 0.5, 1.0}) {
    WorkingPoint wp;
    wp.surge = u_ref;
    const DiscreteModel d = linearize_discretize(design, wp, 0.1);
    for (const auto& q : {std::array<double, 5>{1, 1, 1, 0.01, 0.01},
                          std::array<double, 5>{1e-5, 1e3, 1e-5, 1e3, 1e-5},
                          std::array<double, 5>{1e3, 1e-5, 1e3, 1e-5, 1e3}}) {
      check(d.a, d.b, lqr_state_weights(q), Eigen::MatrixXd::Identity(3, 3));
    }
  }
  double worst_scalar = 0.0;
  for (auto [a, b, q, r] : {std::array<double, 4>{1, 1, 1, 1}, {1.2, 0.5, 2.0, 0.3},
                            {0.9, 2.0, 0.01, 5.0}, {-1.5, 1.0, 1.0, 1.0}, {0.3, 1.0, 1.0, 1.0}}) {
    const double p = solve_dare(Eigen::MatrixXd::Constant(1, 1, a),
                                Eigen::MatrixXd::Constant(1, 1, b),
                                Eigen::MatrixXd::Constant(1, 1, q),
                                Eigen::MatrixXd::Constant(1, 1, r))(0, 0);
    const double expect = oracle::scalar_dare_by_iteration(a, b, q, r);
    worst_scalar = std::max(worst_scalar, std::abs(p - expect) / std::max(1.0, expect));
  }
  return {failures == 0 && worst_res < 1e-8 && worst_rho < 1.0 && worst_scalar <= 1e-10,
          "failures " + std::to_string(failures) + ", max residual " + fmt(worst_res) +
              ", max rho " + fmt(worst_rho, 6) + ", scalar error " + fmt(worst_scalar)};
}

// -------------------------------------------------------------- 5: energy

Trace constant_trace(double t_end, double dt, ThrusterCommand cmd) {
  Trace tr;
  const int rows = static_cast<int>(std::llround(t_end / dt));
  for (int i = 0; i < rows; ++i) {
    TraceSample row;
    row.t = i * dt;
    row.command = cmd;
    tr.samples.push_back(row);
  }
  tr.t_end = t_end;
  tr.complete = true;
  return tr;
}

Outcome energy_closed_forms() {
  bool ok = true;
  std::ostringstream detail;
  for (double t_end : {1.0, 37.3, 250.0}) {
    const Trace tr = constant_trace(t_end, 0.1, {});
    ok = ok && energy_cost(tr, CostVariant::kOriginal) == t_end &&
         energy_cost(tr, CostVariant::kQuadratic) == t_end;
  }
  const double full = energy_cost(constant_trace(10.0, 0.1, {1.0, 0.0, 0.0}), CostVariant::kOriginal);
  detail << "u=1 for 10 s: energy " << std::setprecision(12) << full - 10.0;
  double worst = std::abs(full - 10.0 - 20.25);
  for (double u : {-1.0, -0.4, 0.25, 0.7}) {
    for (int ch = 0; ch < 3; ++ch) {
      Vec3 v = Vec3::Zero();
      v[ch] = u;
      const ThrusterCommand cmd = ThrusterCommand::from_vector(v);
      const double a = std::abs(u);
      const double orig = 12.0 + 12.0 * (0.025 + a + a * std::sqrt(a));
      const double quad = 12.0 + 12.0 * (0.025 + u * u);
      worst = std::max(worst, std::abs(energy_cost(constant_trace(12.0, 0.1, cmd),
                                                   CostVariant::kOriginal) - orig));
      worst = std::max(worst, std::abs(energy_cost(constant_trace(12.0, 0.1, cmd),
                                                   CostVariant::kQuadratic) - quad));
    }
  }
  detail << ", max closed-form error " << fmt(worst)
         << (ok ? ", zero command gives T_end exactly" : ", zero command differs from T_end");
  return {ok && worst <= 1e-9, detail.str()};
}

// ------------------------------------------------- 6: crash-constraint BO

constexpr double kBoxSide = 6.0;
constexpr double kCrashRadius = 1.311;  // ~15 % of the box

double bench_f(double x1, double x2) { return std::cos(2.0 * x1) * std::cos(x2) + std::sin(x1); }
double bench_c(double x1, double x2) { return std::cos(x1 + x2); }
bool in_crash(double x1, double x2) { return std::hypot(x1 - 3.0, x2 - 3.0) < kCrashRadius; }

Observation bench_eval(const Eigen::VectorXd& x) {
  const double x1 = kBoxSide * x[0], x2 = kBoxSide * x[1];
  if (in_crash(x1, x2)) return {std::nan(""), std::nan(""), false};
  return {bench_f(x1, x2), bench_c(x1, x2), true};
}

Outcome crash_benchmark() {
  double f_star = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 200; ++i) {
    for (int k = 0; k < 200; ++k) {
      const double x1 = kBoxSide * i / 199.0, x2 = kBoxSide * k / 199.0;
      if (!in_crash(x1, x2) && bench_c(x1, x2) <= 0.5) f_star = std::min(f_star, bench_f(x1, x2));
    }
  }
  const double tol = 0.05 * std::abs(f_star);
  int hits = 0;
  double bo_crash = 0.0, rs_crash = 0.0;
  std::ostringstream detail;
  detail << "grid optimum " << fmt(f_star, 6) << "; best feasible per repeat:";
  for (int rep = 0; rep < 5; ++rep) {
    BoConfig cfg;
    cfg.dimension = 2;
    cfg.budget = 90;
    cfg.g_max = 0.5;
    cfg.seed = 600 + static_cast<std::uint64_t>(rep);
    const BoResult r = optimize(bench_eval, cfg);
    double best = std::numeric_limits<double>::infinity();
    int crashes = 0;
    for (int i = 0; i < r.data.size(); ++i) {
      const Observation& o = r.data.observation(i);
      if (!o.l) ++crashes;
      else if (o.g <= 0.5) best = std::min(best, o.j);
    }
    if (best <= f_star + tol) ++hits;
    bo_crash += crashes / 90.0 / 5.0;
    detail << ' ' << fmt(best, 6);

    std::mt19937_64 rng(700 + static_cast<std::uint64_t>(rep));
    std::uniform_real_distribution<double> u(0.0, kBoxSide);
    int rs = 0;
    for (int i = 0; i < 90; ++i) rs += in_crash(u(rng), u(rng)) ? 1 : 0;
    rs_crash += rs / 90.0 / 5.0;
  }
  detail << "; within 5%: " << hits << "/5; crash fraction BO " << fmt(bo_crash) << " vs random "
         << fmt(rs_crash);
  return {hits >= 4 && bo_crash < rs_crash, detail.str()};
}

// ------------------------------------------------------- 7-9: GNC studies

class Studies {
 public:
  Studies(Config cfg, fs::path workdir) : cfg_(std::move(cfg)), workdir_(std::move(workdir)) {}

  static constexpr int kSmokeMultiplier = 10;
  static constexpr int kRepeats = 3;

  const ExperimentReport& get(const std::string& name, ParamMask mask, const std::string& tier,
                              bool robust) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    ExperimentSpec spec;
    spec.kind = robust ? StudyKind::kRobust
                       : (mask == ParamMask::kAll ? StudyKind::kJoint : StudyKind::kIndividual);
    spec.mask = mask;
    spec.tier = tier;
    spec.robust = robust;
    spec.repeats = kRepeats;
    spec.budget_multiplier = kSmokeMultiplier;
    spec.seed = 1;
    spec.out_dir = (workdir_ / name).string();
    spec.resume = true;
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep = run_experiment(cfg_, spec);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "  study " << name << ": d=" << rep.dimension << " budget=" << rep.budget
              << " repeats=" << kRepeats << " (" << fmt(secs, 5) << " s)" << std::endl;
    return cache_.emplace(name, std::move(rep)).first->second;
  }

  const Config& config() const { return cfg_; }

 private:
  Config cfg_;
  fs::path workdir_;
  std::map<std::string, ExperimentReport> cache_;
};

const RunRecord* best_of(const ExperimentReport& rep) {
  if (rep.best_run < 0) return nullptr;
  return &rep.runs[static_cast<std::size_t>(rep.best_run)];
}

std::string describe(const RunRecord* r) {
  if (r == nullptr) return "none";
  return "j " + fmt(r->j, 6) + " g " + fmt(r->g, 4) + (r->feasible ? "" : " (infeasible)");
}

Outcome joint_beats_individual(Studies& s) {
  const RunRecord* joint = best_of(s.get("joint_med", ParamMask::kAll, "med", false));
  const RunRecord* plan = best_of(s.get("individual_plan", ParamMask::kPlan, "med", false));
  const RunRecord* control =
      best_of(s.get("individual_control", ParamMask::kControl, "med", false));
  const RunRecord* filter = best_of(s.get("individual_filter", ParamMask::kFilter, "med", false));
  std::ostringstream detail;
  detail << "joint " << describe(joint) << "; plan " << describe(plan) << "; control "
         << describe(control) << "; filter " << describe(filter);
  if (!joint || !plan || !control || !filter || !joint->feasible) return {false, detail.str()};
  double best_individual = std::numeric_limits<double>::infinity();
  for (const RunRecord* r : {plan, control, filter}) {
    if (r->feasible) best_individual = std::min(best_individual, r->j);
  }
  const bool strict = joint->j < best_individual;
  detail << "; smoke bound " << fmt(1.05 * best_individual, 6)
         << (strict ? "; strictly lower" : "; not strictly lower");
  return {joint->j <= 1.05 * best_individual, detail.str()};
}

Outcome accuracy_tradeoff(Studies& s) {
  const RunRecord* med = best_of(s.get("joint_med", ParamMask::kAll, "med", false));
  const RunRecord* max = best_of(s.get("joint_max", ParamMask::kAll, "max", false));
  const std::string detail = "max " + describe(max) + "; med " + describe(med);
  if (!med || !max) return {false, detail};
  return {max->g < med->g && max->j > med->j, detail};
}

Outcome robust_validation(Studies& s) {
  const RunRecord* single = best_of(s.get("joint_med", ParamMask::kAll, "med", false));
  const RunRecord* robust = best_of(s.get("robust_med", ParamMask::kAll, "med", true));
  if (!single || !robust) return {false, "a study produced no best point"};
  const Config& cfg = s.config();
  const ScenarioConfig sc = cfg.scenario_for(cfg.tier("med"));
  const int n = cfg.experiment.validation_seeds;
  const std::uint64_t master = cfg.experiment.validation_master_seed;
  const ValidationReport v1 = validate(single->a_best, sc, n, master, worker_count());
  const ValidationReport v5 = validate(robust->a_best, sc, n, master, worker_count());
  const double increase = v5.mean_j / v1.mean_j - 1.0;
  std::ostringstream detail;
  detail << "violations of " << n << ": single-seed " << v1.violations() << " ("
         << v1.crashes << " crashes), robust " << v5.violations() << " (" << v5.crashes
         << " crashes); mean j " << fmt(v1.mean_j, 6) << " vs " << fmt(v5.mean_j, 6)
         << " (" << fmt(100.0 * increase, 3) << "%)";
  return {v5.violations() < v1.violations() && std::isfinite(increase) && increase <= 0.15,
          detail.str()};
}

// ---------------------------------------------------------- 10: determinism

Outcome determinism(const Config& cfg, const fs::path& workdir) {
  ScenarioConfig sc = cfg.scenario_for(cfg.tier("med"));
  sc.seed = 3;
  auto episode_bytes = [&] {
    const EpisodeResult r = run_episode(cfg.defaults, sc);
    std::ostringstream out;
    out << to_json(r).dump() << '\n';
    write_trace_csv(r.trace, out);
    return out.str();
  };
  const bool episode_same = episode_bytes() == episode_bytes();

  ExperimentSpec spec;
  spec.mask = ParamMask::kPlan;
  spec.repeats = 1;
  spec.budget_multiplier = 3;
  spec.seed = 11;
  std::vector<std::string> histories, summaries;
  for (const char* name : {"determinism_a", "determinism_b"}) {
    const fs::path dir = workdir / name;
    fs::remove_all(dir);
    spec.out_dir = dir.string();
    run_experiment(cfg, spec);
    histories.push_back(read_file(dir / "run_0" / "history.jsonl"));
    summaries.push_back(read_file(dir / "summary.json"));
  }
  const bool bo_same = !histories[0].empty() && histories[0] == histories[1] &&
                       summaries[0] == summaries[1];
  return {episode_same && bo_same,
          std::string("episode ") + (episode_same ? "identical" : "differs") + ", BO history (" +
              std::to_string(histories[0].size()) + " bytes) " +
              (bo_same ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"auvtune acceptance checks"};
  std::string criteria_text = "1,2,3,4,5,6,7,8,9,10";
  std::string workdir = (fs::temp_directory_path() / "auvtune_acceptance").string();
  std::string config_path;
  app.add_option("--criteria", criteria_text, "Comma-separated criterion numbers");
  app.add_option("--workdir", workdir, "Directory for study outputs");
  app.add_option("--config", config_path, "Configuration file (default: built-in)");
  CLI11_PARSE(app, argc, argv);

  std::set<int> wanted;
  std::stringstream ss(criteria_text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      const int c = std::stoi(item);
      if (c < 1 || c > 10) throw std::out_of_range(item);
      wanted.insert(c);
    } catch (const std::exception&) {
      std::cerr << "invalid criterion '" << item << "'\n";
      return 2;
    }
  }

  Config cfg;
  try {
    cfg = config_path.empty() ? default_config() : load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  fs::create_directories(workdir);
  Studies studies(cfg, workdir);

  const std::map<int, std::pair<std::string, std::function<Outcome()>>> table{
      {1, {"GP oracle equivalence", gp_oracle}},
      {2, {"UKF oracle equivalence", ukf_oracle}},
      {3, {"Dubins optimality", dubins_optimality}},
      {4, {"LQR soundness", lqr_soundness}},
      {5, {"energy-cost closed forms", energy_closed_forms}},
      {6, {"crash-constraint BO benchmark", crash_benchmark}},
      {7, {"joint beats individual (smoke budget)", [&] { return joint_beats_individual(studies); }}},
      {8, {"accuracy trade-off ordering", [&] { return accuracy_tradeoff(studies); }}},
      {9, {"robust-mode validation", [&] { return robust_validation(studies); }}},
      {10, {"determinism", [&] { return determinism(cfg, workdir); }}},
  };

  int failed = 0;
  for (int c : wanted) {
    const auto& [name, fn] = table.at(c);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) ++failed;
    std::cout << "criterion " << c << " " << (out.pass ? "PASS" : "FAIL") << ": " << name << " -- "
              << out.detail << " (" << std::fixed << std::setprecision(1) << secs << " s)"
              << std::defaultfloat << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
