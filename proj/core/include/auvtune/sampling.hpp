#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace auvtune {

/// n x d Latin hypercube in [0, 1]^d: each column has exactly one point in
/// every stratum [i/n, (i+1)/n). Deterministic per seed.
Eigen::MatrixXd latin_hypercube(int n, int d, std::uint64_t seed);

/// n x d Halton points (first d primes as bases), skipping the origin, with
/// a Cranley-Patterson rotation by `shift` (mod 1). An empty shift means none.
Eigen::MatrixXd halton(int n, int d, const Eigen::VectorXd& shift = {});

/// Uniform random shift vector for halton().
Eigen::VectorXd random_shift(int d, std::uint64_t seed);

}  // namespace auvtune
