#include "auvtune/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "auvtune/common.hpp"

namespace auvtune {

namespace {

constexpr std::uint64_t kLhsStream = 0x6c6873ULL;     // "lhs"
constexpr std::uint64_t kShiftStream = 0x7368696674ULL;  // "shift"

std::vector<int> first_primes(int count) {
  std::vector<int> primes;
  for (int c = 2; static_cast<int>(primes.size()) < count; ++c) {
    bool prime = true;
    for (int p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0;
  double r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
    i /= static_cast<std::uint64_t>(base);
  }
  return r;
}

}  // namespace

Eigen::MatrixXd latin_hypercube(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ConfigError("latin hypercube needs n >= 1 and d >= 1");
  auto rng = make_stream(seed, kLhsStream);
  Eigen::MatrixXd x(n, d);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) {
      x(i, j) = (perm[static_cast<std::size_t>(i)] + uniform01(rng)) / n;
    }
  }
  return x;
}

Eigen::MatrixXd halton(int n, int d, const Eigen::VectorXd& shift) {
  if (n < 0 || d < 1) throw ConfigError("halton needs n >= 0 and d >= 1");
  if (shift.size() != 0 && shift.size() != d) throw ConfigError("halton shift has wrong size");
  const auto primes = first_primes(d);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      double v = radical_inverse(static_cast<std::uint64_t>(i) + 1, primes[static_cast<std::size_t>(j)]);
      if (shift.size() != 0) {
        v += shift[j];
        v -= std::floor(v);
      }
      x(i, j) = v;
    }
  }
  return x;
}

Eigen::VectorXd random_shift(int d, std::uint64_t seed) {
  auto rng = make_stream(seed, kShiftStream);
  Eigen::VectorXd s(d);
  for (int j = 0; j < d; ++j) s[j] = uniform01(rng);
  return s;
}

}  // namespace auvtune
