#include "auvtune/normal.hpp"

#include <cmath>
#include <numbers>

#include "auvtune/common.hpp"

namespace auvtune {

std::string_view to_string(CrashReason reason) {
  switch (reason) {
    case CrashReason::kNone: return "none";
    case CrashReason::kNumericalDivergence: return "numerical_divergence";
    case CrashReason::kCovarianceFailure: return "covariance_failure";
    case CrashReason::kInnovationSingular: return "innovation_singular";
    case CrashReason::kRiccatiFailure: return "riccati_failure";
    case CrashReason::kTimeout: return "timeout";
  }
  return "unknown";
}

namespace normal {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

double pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double log_cdf(double z) {
  if (z > -5.0) return std::log(cdf(z));
  // Asymptotic series of the Mills ratio for the far lower tail.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(series);
}

double inverse_mills(double z) {
  if (z > -5.0) return pdf(z) / cdf(z);
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -z / series;
}

}  // namespace normal
}  // namespace auvtune
