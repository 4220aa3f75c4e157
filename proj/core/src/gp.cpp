#include "auvtune/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "auvtune/common.hpp"

namespace auvtune {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;
constexpr std::uint64_t kFitStream = 0x67706669ULL;  // "gpfi"

// Box used to keep the search numerically sane; the prior does the shaping.
constexpr double kLogSignalMin = -13.815510557964274;  // ln 1e-6
constexpr double kLogSignalMax = 9.210340371976184;    // ln 1e4
constexpr double kLogEllMin = -6.907755278982137;      // ln 1e-3
constexpr double kLogEllMax = 4.605170185988092;       // ln 1e2
constexpr double kMeanAbsMax = 10.0;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::MatrixXd scaled(const Eigen::MatrixXd& x, const Eigen::VectorXd& log_ell) {
  const Eigen::VectorXd inv = (-log_ell.array()).exp();
  return x * inv.asDiagonal();
}

Eigen::MatrixXd se_from_scaled(const Eigen::MatrixXd& za, const Eigen::VectorXd& sqa,
                               const Eigen::MatrixXd& zb, const Eigen::VectorXd& sqb,
                               double signal_var) {
  Eigen::MatrixXd d2 = -2.0 * za * zb.transpose();
  d2.colwise() += sqa;
  d2.rowwise() += sqb.transpose();
  return signal_var * (-0.5 * d2.array().max(0.0)).exp().matrix();
}

struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd kse;
  double jitter = 0.0;
  bool ok = false;
};

Factorization factorize(const Eigen::MatrixXd& z, const Eigen::VectorXd& sq, double signal_var) {
  Factorization f;
  f.kse = se_from_scaled(z, sq, z, sq, signal_var);
  f.kse.diagonal().setConstant(signal_var);
  for (double c = kJitterStart; c <= kJitterMax * 1.0000001; c *= 10.0) {
    Eigen::MatrixXd k = f.kse;
    k.diagonal().array() += c * signal_var;
    f.llt.compute(k);
    if (f.llt.info() == Eigen::Success && f.llt.matrixLLT().diagonal().minCoeff() > 0.0) {
      f.jitter = c;
      f.ok = true;
      return f;
    }
  }
  return f;
}

Eigen::VectorXd project(Eigen::VectorXd theta) {
  const Eigen::Index d = theta.size() - 2;
  theta[0] = std::clamp(theta[0], kLogSignalMin, kLogSignalMax);
  for (Eigen::Index k = 1; k <= d; ++k) theta[k] = std::clamp(theta[k], kLogEllMin, kLogEllMax);
  theta[d + 1] = std::clamp(theta[d + 1], -kMeanAbsMax, kMeanAbsMax);
  return theta;
}

struct Standardization {
  double offset = 0.0;
  double scale = 1.0;
};

Standardization standardize(const Eigen::VectorXd& y) {
  Standardization s;
  s.offset = y.mean();
  const double var = (y.array() - s.offset).square().mean();
  const double sd = std::sqrt(var);
  s.scale = sd > 1e-12 * std::max(1.0, std::abs(s.offset)) ? sd : 1.0;
  return s;
}

// Maximizes the objective by BFGS with Armijo backtracking inside the box.
std::pair<Eigen::VectorXd, double> refine(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                          const HyperPrior& prior, Eigen::VectorXd theta,
                                          int max_steps, double tol) {
  auto eval = [&](const Eigen::VectorXd& t, bool grad) {
    return log_marginal_likelihood(x, y, GpHyper::from_vector(t), prior, grad);
  };
  theta = project(theta);
  LmlResult cur = eval(theta, true);
  if (!std::isfinite(cur.value)) return {theta, cur.value};
  const Eigen::Index p = theta.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(p, p);
  bool fresh = true;
  int stalls = 0;
  for (int it = 0; it < max_steps; ++it) {
    if (cur.gradient.lpNorm<Eigen::Infinity>() < tol) break;
    Eigen::VectorXd dir = h * cur.gradient;
    if (!(cur.gradient.dot(dir) > 0.0)) {
      h.setIdentity();
      fresh = true;
      dir = cur.gradient;
    }
    const double longest = dir.lpNorm<Eigen::Infinity>();
    double t = longest > 2.0 ? 2.0 / longest : 1.0;
    Eigen::VectorXd next;
    LmlResult trial;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
      next = project(theta + t * dir);
      const Eigen::VectorXd step = next - theta;
      if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
      trial = eval(next, false);
      if (std::isfinite(trial.value) &&
          trial.value >= cur.value + 1e-4 * cur.gradient.dot(step)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (fresh) break;
      h.setIdentity();
      fresh = true;
      continue;
    }
    trial = eval(next, true);
    const Eigen::VectorXd s = next - theta;
    const Eigen::VectorXd yk = cur.gradient - trial.gradient;  // gradient change of -LML
    const double sy = s.dot(yk);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
      h = (eye - rho * s * yk.transpose()) * h * (eye - rho * yk * s.transpose()) +
          rho * s * s.transpose();
      fresh = false;
    }
    const double gain = trial.value - cur.value;
    stalls = gain < 1e-12 * (1.0 + std::abs(cur.value)) ? stalls + 1 : 0;
    theta = next;
    cur = trial;
    if (stalls >= 3) break;
  }
  return {theta, cur.value};
}

}  // namespace

double HyperPrior::log_density(double log_ell) const {
  return -softplus((log_lo - log_ell) / width) - softplus((log_ell - log_hi) / width);
}

double HyperPrior::derivative(double log_ell) const {
  return (sigmoid((log_lo - log_ell) / width) - sigmoid((log_ell - log_hi) / width)) / width;
}

Eigen::VectorXd GpHyper::to_vector() const {
  Eigen::VectorXd theta(log_lengthscale.size() + 2);
  theta << log_signal_var, log_lengthscale, mean;
  return theta;
}

GpHyper GpHyper::from_vector(const Eigen::VectorXd& theta) {
  if (theta.size() < 3) throw GpError("hyperparameter vector too short");
  GpHyper h;
  h.log_signal_var = theta[0];
  h.log_lengthscale = theta.segment(1, theta.size() - 2);
  h.mean = theta[theta.size() - 1];
  return h;
}

Eigen::MatrixXd se_ard_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              double signal_var, const Eigen::VectorXd& lengthscale) {
  const Eigen::VectorXd log_ell = lengthscale.array().log();
  const Eigen::MatrixXd za = scaled(a, log_ell);
  const Eigen::MatrixXd zb = scaled(b, log_ell);
  return se_from_scaled(za, za.rowwise().squaredNorm(), zb, zb.rowwise().squaredNorm(),
                        signal_var);
}

LmlResult log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const GpHyper& hyper, const HyperPrior& prior,
                                  bool with_gradient) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (y.size() != n || hyper.log_lengthscale.size() != d || n < 1) {
    throw GpError("inconsistent GP data or hyperparameter sizes");
  }
  LmlResult out;
  const double sf2 = std::exp(hyper.log_signal_var);
  const Eigen::MatrixXd z = scaled(x, hyper.log_lengthscale);
  const Eigen::VectorXd sq = z.rowwise().squaredNorm();
  Factorization f = factorize(z, sq, sf2);
  if (!f.ok) {
    out.value = -std::numeric_limits<double>::infinity();
    if (with_gradient) out.gradient = Eigen::VectorXd::Zero(d + 2);
    return out;
  }
  out.jitter = f.jitter;
  const Eigen::VectorXd r = y.array() - hyper.mean;
  const Eigen::VectorXd alpha = f.llt.solve(r);
  double log_prior = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) log_prior += prior.log_density(hyper.log_lengthscale[k]);
  out.value = -0.5 * r.dot(alpha) - f.llt.matrixLLT().diagonal().array().log().sum() -
              0.5 * static_cast<double>(n) * kLog2Pi + log_prior;
  if (!with_gradient) return out;

  const Eigen::MatrixXd kinv = f.llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd w = alpha * alpha.transpose() - kinv;
  const Eigen::MatrixXd b = w.cwiseProduct(f.kse);
  out.gradient.resize(d + 2);
  // dK/dlog sf2 = K, jitter included since it scales with sf2.
  out.gradient[0] = 0.5 * (b.sum() + f.jitter * sf2 * w.trace());
  const Eigen::VectorXd row_sums = b.rowwise().sum();
  const Eigen::MatrixXd bz = b * z;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double term = z.col(k).array().square().matrix().dot(row_sums) - z.col(k).dot(bz.col(k));
    out.gradient[k + 1] = term + prior.derivative(hyper.log_lengthscale[k]);
  }
  out.gradient[d + 1] = alpha.sum();
  return out;
}

GpModel GpModel::condition(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const GpHyper& hyper, const HyperPrior& prior) {
  if (x.rows() < 1 || y.size() != x.rows()) throw GpError("GP needs at least one data point");
  if (hyper.log_lengthscale.size() != x.cols()) throw GpError("length-scale count mismatch");
  GpModel m;
  m.x_ = x;
  m.y_ = y;
  const Standardization s = standardize(y);
  m.y_offset_ = s.offset;
  m.y_scale_ = s.scale;
  m.hyper_ = hyper;
  const double sf2 = std::exp(hyper.log_signal_var);
  m.z_ = scaled(x, hyper.log_lengthscale);
  m.z_sq_ = m.z_.rowwise().squaredNorm();
  Factorization f = factorize(m.z_, m.z_sq_, sf2);
  if (!f.ok) throw GpError("kernel matrix not positive definite after maximal jitter");
  m.chol_ = std::move(f.llt);
  m.jitter_ = f.jitter;
  const Eigen::VectorXd ys = (y.array() - s.offset) / s.scale;
  m.alpha_ = m.chol_.solve((ys.array() - hyper.mean).matrix());
  m.lml_ = log_marginal_likelihood(x, ys, hyper, prior, false).value;
  return m;
}

GpModel GpModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const GpFitOptions& options) {
  if (x.rows() < 1 || y.size() != x.rows()) throw GpError("GP needs at least one data point");
  if (!y.allFinite() || !x.allFinite()) throw GpError("GP data must be finite");
  const Eigen::Index d = x.cols();
  const Standardization s = standardize(y);
  const Eigen::VectorXd ys = (y.array() - s.offset) / s.scale;
  const HyperPrior& prior = options.prior;

  auto rng = make_stream(options.seed, kFitStream);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Eigen::VectorXd> starts;
  for (int i = 0; i < options.random_starts; ++i) {
    Eigen::VectorXd theta(d + 2);
    theta[0] = std::log(0.1) + u01(rng) * (std::log(10.0) - std::log(0.1));
    for (Eigen::Index k = 0; k < d; ++k) {
      theta[k + 1] = prior.log_lo + u01(rng) * (prior.log_hi - prior.log_lo);
    }
    theta[d + 1] = -1.0 + 2.0 * u01(rng);
    starts.push_back(theta);
  }
  if (options.warm_start && options.warm_start->log_lengthscale.size() == d) {
    starts.push_back(project(options.warm_start->to_vector()));
  }

  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const double v =
        log_marginal_likelihood(x, ys, GpHyper::from_vector(starts[i]), prior, false).value;
    if (std::isfinite(v)) scored.emplace_back(v, i);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  Eigen::VectorXd best;
  double best_value = -std::numeric_limits<double>::infinity();
  const std::size_t top = std::min<std::size_t>(scored.size(),
                                                static_cast<std::size_t>(std::max(1, options.refine_top)));
  for (std::size_t i = 0; i < top; ++i) {
    auto [theta, value] = refine(x, ys, prior, starts[scored[i].second], options.max_steps,
                                 options.gradient_tol);
    if (std::isfinite(value) && value > best_value) {
      best_value = value;
      best = theta;
    }
  }

  bool fallback = false;
  if (best.size() == 0) {
    fallback = true;
    best = Eigen::VectorXd::Zero(d + 2);
    best.segment(1, d).setConstant(0.5 * (prior.log_lo + prior.log_hi));
  }
  GpModel m = condition(x, y, GpHyper::from_vector(best), prior);
  m.fallback_ = fallback;
  return m;
}

GpPrediction GpModel::predict(const Eigen::MatrixXd& xs) const {
  if (xs.cols() != x_.cols()) throw GpError("query dimension mismatch");
  const double sf2 = std::exp(hyper_.log_signal_var);
  const Eigen::MatrixXd zs = scaled(xs, hyper_.log_lengthscale);
  const Eigen::MatrixXd ks = se_from_scaled(zs, zs.rowwise().squaredNorm(), z_, z_sq_, sf2);
  GpPrediction p;
  p.mean = (ks * alpha_).array() + hyper_.mean;
  const Eigen::MatrixXd v = chol_.matrixL().solve(ks.transpose());
  p.var = (sf2 - v.colwise().squaredNorm().transpose().array()).max(0.0);
  p.mean = (p.mean.array() * y_scale_ + y_offset_).matrix();
  p.var *= y_scale_ * y_scale_;
  return p;
}

std::pair<double, double> GpModel::predict_point(const Eigen::VectorXd& x) const {
  const GpPrediction p = predict(x.transpose());
  return {p.mean[0], p.var[0]};
}

}  // namespace auvtune
