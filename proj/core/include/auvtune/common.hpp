#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace auvtune {

using Vec3 = Eigen::Matrix<double, 3, 1>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix<double, 3, 3>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

/// Reasons a closed-loop episode can be declared crashed (l = 0).
enum class CrashReason {
  kNone,
  kNumericalDivergence,
  kCovarianceFailure,
  kInnovationSingular,
  kRiccatiFailure,
  kTimeout,
};

std::string_view to_string(CrashReason reason);

/// Raised inside the simulation when a parametrization makes the GNC loop
/// infeasible. The harness turns it into a failed episode, never into an
/// aborted run.
class CrashSignal : public std::runtime_error {
 public:
  CrashSignal(CrashReason reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}
  CrashReason reason() const noexcept { return reason_; }

 private:
  CrashReason reason_;
};

/// Invalid configuration or arguments; distinct from a crash.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Deterministic 64-bit generator seeded from a (seed, stream) pair so that
/// every consumer in an episode gets an isolated reproducible stream.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

inline double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(std::mt19937_64& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace auvtune
