#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "auvtune/gp.hpp"
#include "oracles.hpp"

namespace auvtune {
namespace {

Eigen::MatrixXd uniform(std::mt19937_64& rng, int n, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

GpHyper make_hyper(double sf2, Eigen::VectorXd ell, double mean) {
  GpHyper h;
  h.log_signal_var = std::log(sf2);
  h.log_lengthscale = ell.array().log();
  h.mean = mean;
  return h;
}

TEST(Gp, PosteriorMatchesDenseOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 5, d = 1 + trial % 3;
    const Eigen::MatrixXd x = uniform(rng, n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = std::sin(3.0 * x(i, 0)) + 10.0 * x.row(i).sum();
    // Length scales short enough that K stays well conditioned.
    Eigen::VectorXd ell = Eigen::VectorXd::Constant(d, 0.15);
    ell[0] = 0.1;
    const GpHyper hyper = make_hyper(1.7, ell, 0.3);
    const GpModel m = GpModel::condition(x, y, hyper);

    const Eigen::MatrixXd xs = uniform(rng, 7, d);
    const GpPrediction p = m.predict(xs);
    const Eigen::VectorXd z = (y.array() - m.y_offset()) / m.y_scale();
    const auto o = oracle::gp_posterior(x, z, xs, 1.7, ell, 0.3, m.jitter() * 1.7);
    for (int q = 0; q < xs.rows(); ++q) {
      const double mean = m.y_offset() + m.y_scale() * o.mean[q];
      const double var = m.y_scale() * m.y_scale() * o.var[q];
      EXPECT_NEAR(p.mean[q], mean, 1e-10 * std::max(1.0, std::abs(mean)));
      EXPECT_NEAR(p.var[q], var, 1e-10 * std::max(1.0, var));
      const auto [pm, pv] = m.predict_point(xs.row(q).transpose());
      EXPECT_NEAR(pm, p.mean[q], 1e-12 * std::max(1.0, std::abs(pm)));
      EXPECT_NEAR(pv, p.var[q], 1e-12 * std::max(1.0, pv));
    }
  }
}

TEST(Gp, KernelMatchesDefinition) {
  Eigen::MatrixXd a(2, 2), b(1, 2);
  a << 0.0, 0.0, 0.5, 1.0;
  b << 0.2, 0.4;
  const Eigen::Vector2d ell(0.5, 2.0);
  const Eigen::MatrixXd k = se_ard_kernel(a, b, 3.0, ell);
  EXPECT_NEAR(k(0, 0), 3.0 * std::exp(-0.5 * (0.16 + 0.04)), 1e-15);
  EXPECT_NEAR(k(1, 0), 3.0 * std::exp(-0.5 * (0.36 + 0.09)), 1e-15);
}

TEST(Gp, LogMarginalLikelihoodMatchesClosedForm) {
  std::mt19937_64 rng(32);
  const Eigen::MatrixXd x = uniform(rng, 6, 2);
  Eigen::VectorXd y(6);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 6; ++i) y[i] = n01(rng);
  const HyperPrior prior;
  const GpHyper h = make_hyper(0.8, Eigen::Vector2d(0.3, 0.6), -0.2);
  const LmlResult r = log_marginal_likelihood(x, y, h, prior, false);

  const double sf2 = 0.8;
  Eigen::MatrixXd k(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double a = (x(i, 0) - x(j, 0)) / 0.3, b = (x(i, 1) - x(j, 1)) / 0.6;
      k(i, j) = sf2 * std::exp(-0.5 * (a * a + b * b));
    }
    k(i, i) += r.jitter * sf2;
  }
  const Eigen::VectorXd res = (y.array() + 0.2).matrix();
  const double expect = -0.5 * res.dot(k.fullPivLu().solve(res)) -
                        0.5 * std::log(k.determinant()) -
                        3.0 * std::log(2.0 * std::numbers::pi) +
                        prior.log_density(std::log(0.3)) + prior.log_density(std::log(0.6));
  EXPECT_NEAR(r.value, expect, 1e-9 * std::abs(expect));
}

TEST(Gp, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(33);
  const HyperPrior prior;
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + trial % 4;
    const Eigen::MatrixXd x = uniform(rng, 5 + trial % 4, d);
    Eigen::VectorXd y(x.rows());
    for (int i = 0; i < x.rows(); ++i) y[i] = std::cos(4.0 * x(i, 0)) + x.row(i).squaredNorm();
    y = (y.array() - y.mean()) / std::sqrt((y.array() - y.mean()).square().mean());
    Eigen::VectorXd theta(d + 2);
    std::uniform_real_distribution<double> u(-1.0, 0.5), log_ell(-3.0, -1.5);
    for (int i = 0; i < theta.size(); ++i) theta[i] = u(rng);
    // Length scales inside the prior box and short enough for a well
    // conditioned K, so the finite differences are accurate.
    for (int i = 1; i <= d; ++i) theta[i] = log_ell(rng);

    const LmlResult r = log_marginal_likelihood(x, y, GpHyper::from_vector(theta), prior, true);
    ASSERT_EQ(r.gradient.size(), theta.size());
    const double h = 1e-5;
    for (int i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd up = theta, down = theta;
      up[i] += h;
      down[i] -= h;
      const double fd = (log_marginal_likelihood(x, y, GpHyper::from_vector(up), prior, false).value -
                         log_marginal_likelihood(x, y, GpHyper::from_vector(down), prior, false).value) /
                        (2.0 * h);
      EXPECT_NEAR(r.gradient[i], fd, 1e-4 * std::max(1.0, std::abs(fd)))
          << "trial " << trial << " component " << i;
    }
  }
}

TEST(Gp, HyperVectorRoundTrip) {
  const GpHyper h = make_hyper(2.0, Eigen::Vector3d(0.1, 0.2, 0.3), 0.5);
  const GpHyper back = GpHyper::from_vector(h.to_vector());
  EXPECT_EQ(back.log_signal_var, h.log_signal_var);
  EXPECT_EQ(back.log_lengthscale, h.log_lengthscale);
  EXPECT_EQ(back.mean, h.mean);
}

TEST(Gp, PriorIsFlatInsideTheBoxAndFallsOutside) {
  const HyperPrior p;
  EXPECT_NEAR(p.log_density(std::log(0.3)), p.log_density(std::log(2.0)), 1e-6);
  EXPECT_LT(p.log_density(std::log(1e-3)), p.log_density(std::log(0.3)) - 10.0);
  EXPECT_LT(p.log_density(std::log(100.0)), p.log_density(std::log(0.3)) - 10.0);
  const double h = 1e-6;
  for (double v : {-6.0, -4.6, -1.0, 2.3, 4.0}) {
    const double fd = (p.log_density(v + h) - p.log_density(v - h)) / (2.0 * h);
    EXPECT_NEAR(p.derivative(v), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Gp, RevertsToPriorFarFromData) {
  std::mt19937_64 rng(34);
  const Eigen::MatrixXd x = uniform(rng, 10, 2) * 0.2;
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) y[i] = 5.0 + x(i, 0) - 2.0 * x(i, 1);
  const GpHyper h = make_hyper(1.3, Eigen::Vector2d(0.05, 0.05), 0.4);
  const GpModel m = GpModel::condition(x, y, h);
  const auto [mean, var] = m.predict_point(Eigen::Vector2d(1.0, 1.0));
  EXPECT_NEAR(mean, m.y_offset() + m.y_scale() * 0.4, 1e-9);
  EXPECT_NEAR(var, m.y_scale() * m.y_scale() * 1.3, 1e-9);
}

TEST(Gp, InterpolatesTrainingData) {
  std::mt19937_64 rng(35);
  const Eigen::MatrixXd x = uniform(rng, 12, 3);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) y[i] = std::exp(x(i, 0)) - x(i, 2);
  const GpModel m = GpModel::fit(x, y, GpFitOptions{.seed = 3});
  const GpPrediction p = m.predict(x);
  for (int i = 0; i < 12; ++i) {
    EXPECT_NEAR(p.mean[i], y[i], 1e-3);
    EXPECT_GE(p.var[i], 0.0);
    EXPECT_LT(p.var[i], 1e-3);
  }
}

TEST(Gp, VarianceNeverGrowsWithMoreData) {
  std::mt19937_64 rng(36);
  const Eigen::MatrixXd x = uniform(rng, 15, 2);
  Eigen::VectorXd y(15);
  for (int i = 0; i < 15; ++i) y[i] = std::sin(5.0 * x(i, 0)) * x(i, 1);
  const Eigen::MatrixXd xs = uniform(rng, 50, 2);
  // Fixed standardized hyperparameters; only the data set grows.
  const GpHyper h = make_hyper(1.0, Eigen::Vector2d(0.3, 0.3), 0.0);
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(50, std::numeric_limits<double>::infinity());
  for (int n = 2; n <= 15; ++n) {
    const GpModel m = GpModel::condition(x.topRows(n), y.head(n), h);
    const Eigen::VectorXd var = m.predict(xs).var / (m.y_scale() * m.y_scale());
    for (int q = 0; q < 50; ++q) EXPECT_LE(var[q], prev[q] + 1e-9);
    prev = var;
  }
}

TEST(Gp, ConstantTargetsAreHandled) {
  std::mt19937_64 rng(37);
  const Eigen::MatrixXd x = uniform(rng, 6, 2);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 4.2);
  const GpModel m = GpModel::fit(x, y, GpFitOptions{.seed = 1});
  const GpPrediction p = m.predict(uniform(rng, 5, 2));
  for (int q = 0; q < 5; ++q) EXPECT_NEAR(p.mean[q], 4.2, 1e-9);
  EXPECT_TRUE(p.var.allFinite());
}

TEST(Gp, RelevanceDeterminationFindsIrrelevantInput) {
  std::mt19937_64 rng(38);
  const Eigen::MatrixXd x = uniform(rng, 30, 2);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) y[i] = std::sin(6.0 * x(i, 0));
  const GpModel m = GpModel::fit(x, y, GpFitOptions{.seed = 5});
  EXPECT_GT(m.hyper().log_lengthscale[1], m.hyper().log_lengthscale[0] + 1.0);
}

TEST(Gp, FitIsDeterministicPerSeed) {
  std::mt19937_64 rng(39);
  const Eigen::MatrixXd x = uniform(rng, 10, 3);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) y[i] = x.row(i).squaredNorm();
  const GpModel a = GpModel::fit(x, y, GpFitOptions{.seed = 7});
  const GpModel b = GpModel::fit(x, y, GpFitOptions{.seed = 7});
  EXPECT_EQ(a.hyper().to_vector(), b.hyper().to_vector());
  EXPECT_EQ(a.log_likelihood(), b.log_likelihood());
  EXPECT_EQ(a.predict(x).mean, b.predict(x).mean);
}

TEST(Gp, FitImprovesOnItsStartingPoints) {
  std::mt19937_64 rng(40);
  const Eigen::MatrixXd x = uniform(rng, 20, 2);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) y[i] = std::cos(3.0 * x(i, 0)) + 0.5 * x(i, 1);
  const GpModel m = GpModel::fit(x, y, GpFitOptions{.seed = 2});
  const Eigen::VectorXd ys = (y.array() - m.y_offset()) / m.y_scale();
  for (double ell : {0.05, 0.2, 1.0, 5.0}) {
    const GpHyper h = make_hyper(1.0, Eigen::Vector2d::Constant(ell), 0.0);
    EXPECT_GE(m.log_likelihood() + 1e-6,
              log_marginal_likelihood(x, ys, h, HyperPrior{}, false).value);
  }
}

TEST(Gp, RejectsBadInput) {
  EXPECT_THROW(GpModel::fit(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)), GpError);
  Eigen::MatrixXd x(2, 1);
  x << 0.1, 0.2;
  EXPECT_THROW(GpModel::fit(x, Eigen::Vector2d(1.0, std::nan(""))), GpError);
}

}  // namespace
}  // namespace auvtune
