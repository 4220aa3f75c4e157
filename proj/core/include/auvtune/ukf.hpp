#pragma once

#include <array>
#include <span>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "auvtune/common.hpp"

namespace auvtune::ukf {

/// Sigma-point spread parameters (Wan & van der Merwe).
struct Scaling {
  double alpha = 1e-3;
  double beta = 2.0;
  double kappa = 0.0;

  double lambda(int n) const { return alpha * alpha * (n + kappa) - n; }
};

template <int N>
struct Gaussian {
  Eigen::Matrix<double, N, 1> mean = Eigen::Matrix<double, N, 1>::Zero();
  Eigen::Matrix<double, N, N> cov = Eigen::Matrix<double, N, N>::Identity();
};

template <int N>
struct SigmaSet {
  static constexpr int kCount = 2 * N + 1;
  Eigen::Matrix<double, N, kCount> points;
  Eigen::Matrix<double, kCount, 1> mean_weights;
  Eigen::Matrix<double, kCount, 1> cov_weights;
};

/// Indices of state components that are angles; their differences are
/// wrapped to (-pi, pi] and their means are formed on the circle.
using AngleIndices = std::span<const int>;

template <int N>
Eigen::Matrix<double, N, 1> difference(const Eigen::Matrix<double, N, 1>& a,
                                       const Eigen::Matrix<double, N, 1>& b, AngleIndices angles) {
  Eigen::Matrix<double, N, 1> d = a - b;
  for (int i : angles) d[i] = wrap_angle(d[i]);
  return d;
}

template <int N>
SigmaSet<N> sigma_points(const Eigen::Matrix<double, N, 1>& mean,
                         const Eigen::Matrix<double, N, N>& cov, const Scaling& s) {
  const double lambda = s.lambda(N);
  const double spread = N + lambda;
  Eigen::LLT<Eigen::Matrix<double, N, N>> llt(spread * cov);
  if (llt.info() != Eigen::Success || !cov.allFinite()) {
    throw CrashSignal(CrashReason::kCovarianceFailure, "covariance is not positive definite");
  }
  const Eigen::Matrix<double, N, N> root = llt.matrixL();

  SigmaSet<N> set;
  set.points.col(0) = mean;
  for (int i = 0; i < N; ++i) {
    set.points.col(1 + i) = mean + root.col(i);
    set.points.col(1 + N + i) = mean - root.col(i);
  }
  set.mean_weights.setConstant(0.5 / spread);
  set.cov_weights.setConstant(0.5 / spread);
  set.mean_weights[0] = lambda / spread;
  set.cov_weights[0] = lambda / spread + (1.0 - s.alpha * s.alpha + s.beta);
  return set;
}

/// Weighted mean of the columns of `points`, accumulated as offsets from the
/// first column so large opposite-signed weights do not cancel catastrophically.
template <int N, int K>
Eigen::Matrix<double, N, 1> weighted_mean(const Eigen::Matrix<double, N, K>& points,
                                          const Eigen::Matrix<double, K, 1>& weights,
                                          AngleIndices angles) {
  const Eigen::Matrix<double, N, 1> ref = points.col(0);
  Eigen::Matrix<double, N, 1> acc = Eigen::Matrix<double, N, 1>::Zero();
  for (int i = 1; i < K; ++i) {
    acc += weights[i] * difference<N>(points.col(i), ref, angles);
  }
  // The weights sum to one, so the reference column carries the remainder.
  Eigen::Matrix<double, N, 1> m = ref + acc;
  for (int i : angles) m[i] = wrap_angle(m[i]);
  return m;
}

template <int N, int K>
Eigen::Matrix<double, N, N> weighted_covariance(const Eigen::Matrix<double, N, K>& points,
                                                const Eigen::Matrix<double, N, 1>& mean,
                                                const Eigen::Matrix<double, K, 1>& weights,
                                                AngleIndices angles) {
  Eigen::Matrix<double, N, N> c = Eigen::Matrix<double, N, N>::Zero();
  for (int i = 0; i < K; ++i) {
    const Eigen::Matrix<double, N, 1> d = difference<N>(points.col(i), mean, angles);
    c.noalias() += weights[i] * d * d.transpose();
  }
  return c;
}

template <int N>
void symmetrize(Eigen::Matrix<double, N, N>& p) {
  p = 0.5 * (p + p.transpose()).eval();
}

template <int N>
void check_covariance(const Eigen::Matrix<double, N, N>& p) {
  if (!p.allFinite()) {
    throw CrashSignal(CrashReason::kNumericalDivergence, "covariance became non-finite");
  }
  Eigen::LLT<Eigen::Matrix<double, N, N>> llt(p);
  if (llt.info() != Eigen::Success) {
    throw CrashSignal(CrashReason::kCovarianceFailure, "covariance lost positive definiteness");
  }
}

/// Additive-noise unscented prediction: sigma points through `process`, then
/// `process_noise` (already scaled by the step length) is added.
template <int N, class Process>
Gaussian<N> predict(const Gaussian<N>& belief, Process&& process,
                    const Eigen::Matrix<double, N, N>& process_noise, const Scaling& s,
                    AngleIndices angles) {
  const SigmaSet<N> set = sigma_points<N>(belief.mean, belief.cov, s);
  Eigen::Matrix<double, N, SigmaSet<N>::kCount> propagated;
  for (int i = 0; i < SigmaSet<N>::kCount; ++i) {
    propagated.col(i) = process(Eigen::Matrix<double, N, 1>(set.points.col(i)));
  }
  if (!propagated.allFinite()) {
    throw CrashSignal(CrashReason::kNumericalDivergence, "sigma point propagation diverged");
  }
  Gaussian<N> out;
  out.mean = weighted_mean<N, SigmaSet<N>::kCount>(propagated, set.mean_weights, angles);
  out.cov = weighted_covariance<N, SigmaSet<N>::kCount>(propagated, out.mean, set.cov_weights,
                                                        angles) +
            process_noise;
  symmetrize<N>(out.cov);
  check_covariance<N>(out.cov);
  return out;
}

/// Unscented measurement update with measurement function `h`.
template <int N, int M, class Measure>
Gaussian<N> correct(const Gaussian<N>& belief, const Eigen::Matrix<double, M, 1>& z,
                    Measure&& h, const Eigen::Matrix<double, M, M>& noise, const Scaling& s,
                    AngleIndices state_angles, AngleIndices measurement_angles) {
  constexpr int K = SigmaSet<N>::kCount;
  const SigmaSet<N> set = sigma_points<N>(belief.mean, belief.cov, s);
  Eigen::Matrix<double, M, K> predicted;
  for (int i = 0; i < K; ++i) {
    predicted.col(i) = h(Eigen::Matrix<double, N, 1>(set.points.col(i)));
  }
  const Eigen::Matrix<double, M, 1> z_hat =
      weighted_mean<M, K>(predicted, set.mean_weights, measurement_angles);

  Eigen::Matrix<double, M, M> s_zz = noise;
  Eigen::Matrix<double, N, M> p_xz = Eigen::Matrix<double, N, M>::Zero();
  for (int i = 0; i < K; ++i) {
    const Eigen::Matrix<double, M, 1> dz =
        difference<M>(predicted.col(i), z_hat, measurement_angles);
    const Eigen::Matrix<double, N, 1> dx =
        difference<N>(set.points.col(i), belief.mean, state_angles);
    s_zz.noalias() += set.cov_weights[i] * dz * dz.transpose();
    p_xz.noalias() += set.cov_weights[i] * dx * dz.transpose();
  }
  Eigen::LLT<Eigen::Matrix<double, M, M>> llt(s_zz);
  if (llt.info() != Eigen::Success || !s_zz.allFinite()) {
    throw CrashSignal(CrashReason::kInnovationSingular, "innovation covariance not invertible");
  }
  // K = P_xz S^-1, computed as (S^-1 P_xz')'.
  const Eigen::Matrix<double, N, M> gain = llt.solve(p_xz.transpose()).transpose();
  const Eigen::Matrix<double, M, 1> innovation = difference<M>(z, z_hat, measurement_angles);

  Gaussian<N> out;
  out.mean = belief.mean + gain * innovation;
  for (int i : state_angles) out.mean[i] = wrap_angle(out.mean[i]);
  out.cov = belief.cov - gain * s_zz * gain.transpose();
  symmetrize<N>(out.cov);
  check_covariance<N>(out.cov);
  return out;
}

}  // namespace auvtune::ukf
