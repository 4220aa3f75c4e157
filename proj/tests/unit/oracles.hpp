#pragma once

// Independent reference implementations used as test oracles. None of them
// calls into the library code they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// ---------------------------------------------------------------- Kalman filter

struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline Gaussian kf_predict(const Gaussian& b, const Eigen::MatrixXd& f, const Eigen::MatrixXd& q) {
  return {f * b.mean, f * b.cov * f.transpose() + q};
}

inline Gaussian kf_update(const Gaussian& b, const Eigen::MatrixXd& h, const Eigen::MatrixXd& r,
                          const Eigen::VectorXd& z) {
  const Eigen::MatrixXd s = h * b.cov * h.transpose() + r;
  const Eigen::MatrixXd k = b.cov * h.transpose() * s.inverse();
  const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(b.mean.size(), b.mean.size());
  // Joseph form for a symmetric result.
  const Eigen::MatrixXd a = i - k * h;
  return {b.mean + k * (z - h * b.mean), a * b.cov * a.transpose() + k * r * k.transpose()};
}

// ------------------------------------------------------------------ GP posterior

struct GpPosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

/// Zero-noise GP with SE-ARD kernel, constant mean m and diagonal jitter,
/// evaluated by explicit loops and a full-pivot LU inverse in extended
/// precision.
inline GpPosterior gp_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& xs, double signal_var,
                                const Eigen::VectorXd& lengthscale, double mean,
                                double jitter) {
  using Real = long double;
  using MatrixL = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorL = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  auto k = [&](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    Real s = 0.0L;
    for (Eigen::Index d = 0; d < a.size(); ++d) {
      const Real t = (static_cast<Real>(a[d]) - b[d]) / lengthscale[d];
      s += t * t;
    }
    return static_cast<Real>(signal_var) * std::exp(-0.5L * s);
  };
  const Eigen::Index n = x.rows();
  MatrixL kxx(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) kxx(i, j) = k(x.row(i), x.row(j));
    kxx(i, i) += jitter;
  }
  const MatrixL kinv = kxx.fullPivLu().inverse();
  VectorL resid(n);
  for (Eigen::Index i = 0; i < n; ++i) resid[i] = static_cast<Real>(y[i]) - mean;
  GpPosterior out;
  out.mean.resize(xs.rows());
  out.var.resize(xs.rows());
  for (Eigen::Index q = 0; q < xs.rows(); ++q) {
    VectorL kq(n);
    for (Eigen::Index i = 0; i < n; ++i) kq[i] = k(xs.row(q), x.row(i));
    out.mean[q] = static_cast<double>(mean + kq.dot(kinv * resid));
    out.var[q] = static_cast<double>(signal_var - kq.dot(kinv * kq));
  }
  return out;
}

// ----------------------------------------------------------------------- DARE

/// Scalar Riccati fixed point p = q + a^2 p - (a b p)^2 / (r + b^2 p).
inline double scalar_dare_by_iteration(double a, double b, double q, double r) {
  double p = q;
  for (int k = 0; k < 100000; ++k) {
    const double next = q + a * a * p - (a * b * p) * (a * b * p) / (r + b * b * p);
    if (std::abs(next - p) <= 1e-15 * std::max(1.0, std::abs(p))) return next;
    p = next;
  }
  return p;
}

// ---------------------------------------------------------------------- Dubins

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
};

inline double mod2pi(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double m = std::fmod(a, two_pi);
  if (m < 0.0) m += two_pi;
  return m;
}

/// Centre of the turning circle on the positive-curvature (left) side.
inline Eigen::Vector2d left_centre(const Pose& p, double r) {
  return {p.x - r * std::sin(p.psi), p.y + r * std::cos(p.psi)};
}

inline Eigen::Vector2d right_centre(const Pose& p, double r) {
  return {p.x + r * std::sin(p.psi), p.y - r * std::cos(p.psi)};
}

/// Heading of a vehicle at point t on a circle of centre c.
inline double heading_on_left(const Eigen::Vector2d& c, const Eigen::Vector2d& t) {
  const Eigen::Vector2d u = t - c;
  return std::atan2(u.x(), -u.y());
}

inline double heading_on_right(const Eigen::Vector2d& c, const Eigen::Vector2d& t) {
  const Eigen::Vector2d u = t - c;
  return std::atan2(-u.x(), u.y());
}

constexpr double kNone = std::numeric_limits<double>::infinity();

/// Lengths of the six words built from tangent-circle geometry, in the order
/// LSL, RSR, LSR, RSL, RLR, LRL. CCC words take the shorter of their two
/// middle-circle placements. Missing words are +inf.
inline std::array<double, 6> dubins_word_lengths(const Pose& s, const Pose& g, double r) {
  std::array<double, 6> out;
  out.fill(kNone);
  {  // LSL
    const Eigen::Vector2d c1 = left_centre(s, r), c2 = left_centre(g, r);
    const Eigen::Vector2d d = c2 - c1;
    const double th = d.norm() > 0.0 ? std::atan2(d.y(), d.x()) : s.psi;
    out[0] = r * mod2pi(th - s.psi) + d.norm() + r * mod2pi(g.psi - th);
  }
  {  // RSR
    const Eigen::Vector2d c1 = right_centre(s, r), c2 = right_centre(g, r);
    const Eigen::Vector2d d = c2 - c1;
    const double th = d.norm() > 0.0 ? std::atan2(d.y(), d.x()) : s.psi;
    out[1] = r * mod2pi(s.psi - th) + d.norm() + r * mod2pi(th - g.psi);
  }
  {  // LSR
    const Eigen::Vector2d c1 = left_centre(s, r), c2 = right_centre(g, r);
    const Eigen::Vector2d d = c2 - c1;
    const double dist = d.norm();
    if (dist >= 2.0 * r) {
      const double ls = std::sqrt(dist * dist - 4.0 * r * r);
      const double th = std::atan2(d.y(), d.x()) + std::atan2(2.0 * r, ls);
      out[2] = r * mod2pi(th - s.psi) + ls + r * mod2pi(th - g.psi);
    }
  }
  {  // RSL
    const Eigen::Vector2d c1 = right_centre(s, r), c2 = left_centre(g, r);
    const Eigen::Vector2d d = c2 - c1;
    const double dist = d.norm();
    if (dist >= 2.0 * r) {
      const double ls = std::sqrt(dist * dist - 4.0 * r * r);
      const double th = std::atan2(d.y(), d.x()) - std::atan2(2.0 * r, ls);
      out[3] = r * mod2pi(s.psi - th) + ls + r * mod2pi(g.psi - th);
    }
  }
  for (int w = 0; w < 2; ++w) {  // RLR, LRL
    const bool rlr = w == 0;
    const Eigen::Vector2d c1 = rlr ? right_centre(s, r) : left_centre(s, r);
    const Eigen::Vector2d c2 = rlr ? right_centre(g, r) : left_centre(g, r);
    const Eigen::Vector2d d = c2 - c1;
    const double dist = d.norm();
    if (dist > 4.0 * r || dist == 0.0) continue;
    const Eigen::Vector2d mid = 0.5 * (c1 + c2);
    const Eigen::Vector2d perp(-d.y() / dist, d.x() / dist);
    const double h = std::sqrt(std::max(0.0, 4.0 * r * r - 0.25 * dist * dist));
    for (double side : {1.0, -1.0}) {
      const Eigen::Vector2d c3 = mid + side * h * perp;
      const Eigen::Vector2d t1 = 0.5 * (c1 + c3), t2 = 0.5 * (c3 + c2);
      double len;
      if (rlr) {
        const double h1 = heading_on_right(c1, t1), h2 = heading_on_right(c2, t2);
        len = r * (mod2pi(s.psi - h1) + mod2pi(h2 - h1) + mod2pi(h2 - g.psi));
      } else {
        const double h1 = heading_on_left(c1, t1), h2 = heading_on_left(c2, t2);
        len = r * (mod2pi(h1 - s.psi) + mod2pi(h1 - h2) + mod2pi(g.psi - h2));
      }
      out[rlr ? 4 : 5] = std::min(out[rlr ? 4 : 5], len);
    }
  }
  return out;
}

inline double dubins_min_length(const Pose& s, const Pose& g, double r) {
  const auto w = dubins_word_lengths(s, g, r);
  return *std::min_element(w.begin(), w.end());
}

}  // namespace oracle
