#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "auvtune/controller.hpp"
#include "auvtune/estimator.hpp"
#include "auvtune/guidance.hpp"

namespace auvtune {

inline constexpr int kParamCount = 13;

/// Positions inside the 13-entry parameter vector.
enum ParamIndex : int {
  kAlpha1 = 0,
  kAlpha2,
  kAlpha3,
  kAlpha4,
  kSurgeRef,
  kPlanRadius,
  kLookahead,
  kQ1,
  kQ2,
  kQ3,
  kQ4,
  kQ5,
  kDeadband,
};

std::string_view param_name(int index);
/// Index of a parameter name, or -1.
int param_index(std::string_view name);

/// True for the entries stored as log10 values (alpha_i and q_i).
bool is_log_param(int index);

/// The tunable GNC vector a. Entries are kept in the optimizer's domain:
/// alpha_i and q_i as log10 values, the rest in physical units.
struct GncParams {
  std::array<double, kParamCount> value{};

  double& operator[](int i) { return value[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return value[static_cast<std::size_t>(i)]; }

  /// Physical value of entry i (10^x for log entries).
  double physical(int i) const;

  std::array<double, 4> alpha() const;
  std::array<double, 5> q() const;
  double surge_ref() const { return value[kSurgeRef]; }
  double plan_radius() const { return value[kPlanRadius]; }
  double lookahead() const { return value[kLookahead]; }
  double deadband() const { return value[kDeadband]; }

  bool operator==(const GncParams&) const = default;
};

struct ParamBounds {
  std::array<double, kParamCount> lo{};
  std::array<double, kParamCount> hi{};

  bool contains(const GncParams& a, double tol = 0.0) const;
  /// Throws ConfigError when a bound pair is empty or non-finite.
  void validate() const;
};

/// Default box: log10 alpha in [-8, 0], u_ref in [0.2, 1.0] m/s,
/// r_plan in [1, r_plan_max] m, Delta in [1, 100] m, log10 q in [-5, 3],
/// w_db in [0, 0.3].
ParamBounds default_bounds(double r_plan_max = 10.0);

enum class ParamMask { kPlan, kControl, kFilter, kAll };

std::string_view to_string(ParamMask mask);
/// Accepts plan|control|filter|all; throws ConfigError otherwise.
ParamMask parse_mask(std::string_view text);
/// Parameter indices tuned under a mask (sizes 3, 6, 4, 13).
std::vector<int> mask_indices(ParamMask mask);

/// Maps between the unit box of a parameter subset and full parameter
/// vectors; untuned entries stay at the base values.
class ParamSpace {
 public:
  ParamSpace(ParamBounds bounds, std::vector<int> active, GncParams base);

  int dimension() const { return static_cast<int>(active_.size()); }
  const std::vector<int>& active() const { return active_; }
  const ParamBounds& bounds() const { return bounds_; }
  const GncParams& base() const { return base_; }

  Eigen::VectorXd normalize(const GncParams& a) const;
  /// Inputs are clipped to [0, 1] first so the result is always in bounds.
  GncParams denormalize(const Eigen::VectorXd& x) const;

 private:
  ParamBounds bounds_;
  std::vector<int> active_;
  GncParams base_;
};

/// Configurations of the GNC modules implied by a parameter vector.
FilterNoiseConfig filter_noise_of(const GncParams& a, const SensorConfig& sensors);
ControllerConfig controller_config_of(const GncParams& a, ControllerConfig base);
GuidanceConfig guidance_config_of(const GncParams& a, GuidanceConfig base);

}  // namespace auvtune
