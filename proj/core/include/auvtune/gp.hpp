#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace auvtune {

class GpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smooth box on the log length scales: two softplus walls of the given
/// width, so the log density is ~0 inside [lo, hi] and falls off linearly
/// (towards -inf) outside.
struct HyperPrior {
  double log_lo = -4.605170185988091;  // ln 1e-2
  double log_hi = 2.302585092994046;   // ln 10
  double width = 0.05;

  double log_density(double log_ell) const;
  double derivative(double log_ell) const;
};

/// Kernel hyperparameters in standardized target units.
struct GpHyper {
  double log_signal_var = 0.0;
  Eigen::VectorXd log_lengthscale;
  double mean = 0.0;

  /// theta = [log sigma_f^2, log l_1 .. log l_d, m].
  Eigen::VectorXd to_vector() const;
  static GpHyper from_vector(const Eigen::VectorXd& theta);
};

struct LmlResult {
  double value = 0.0;
  Eigen::VectorXd gradient;  // empty when not requested
  double jitter = 0.0;       // relative jitter that made K factorizable
};

/// Log marginal likelihood plus log hyperprior of a zero-noise GP with SE-ARD
/// kernel and constant mean, for targets y. Jitter c * sigma_f^2 is added
/// with c escalating from 1e-10 to 1e-4; value is -inf if all fail.
LmlResult log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const GpHyper& hyper, const HyperPrior& prior,
                                  bool with_gradient = true);

struct GpFitOptions {
  int random_starts = 50;
  int refine_top = 3;
  int max_steps = 200;
  double gradient_tol = 1e-6;
  std::uint64_t seed = 0;
  HyperPrior prior{};
  std::optional<GpHyper> warm_start;
};

struct GpPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

/// Exact GP regression on inputs in the unit box. Targets are standardized
/// internally; predictions are in original units.
class GpModel {
 public:
  /// MAP fit: random search in the prior box followed by gradient ascent of
  /// the best starts. Deterministic for a given seed.
  static GpModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const GpFitOptions& options = {});

  /// Conditions on the data with fixed hyperparameters (standardized units).
  /// Throws GpError if K stays indefinite after the largest jitter.
  static GpModel condition(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const GpHyper& hyper, const HyperPrior& prior = {});

  GpPrediction predict(const Eigen::MatrixXd& xs) const;
  /// Mean and variance at a single point.
  std::pair<double, double> predict_point(const Eigen::VectorXd& x) const;

  const GpHyper& hyper() const { return hyper_; }
  double log_likelihood() const { return lml_; }
  double jitter() const { return jitter_; }
  double y_offset() const { return y_offset_; }
  double y_scale() const { return y_scale_; }
  bool used_fallback() const { return fallback_; }
  int size() const { return static_cast<int>(x_.rows()); }
  int dimension() const { return static_cast<int>(x_.cols()); }
  const Eigen::MatrixXd& inputs() const { return x_; }

 private:
  Eigen::MatrixXd x_;
  Eigen::MatrixXd z_;  // inputs divided by the length scales
  Eigen::VectorXd z_sq_;
  Eigen::VectorXd y_;  // original units
  double y_offset_ = 0.0;
  double y_scale_ = 1.0;
  GpHyper hyper_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
  bool fallback_ = false;
};

/// Squared-exponential ARD kernel between rows of a and b.
Eigen::MatrixXd se_ard_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              double signal_var, const Eigen::VectorXd& lengthscale);

}  // namespace auvtune
