#include "auvtune/params.hpp"

#include <algorithm>
#include <cmath>

namespace auvtune {

namespace {

constexpr std::array<std::string_view, kParamCount> kNames{
    "alpha1", "alpha2", "alpha3", "alpha4", "u_ref", "r_plan", "lookahead",
    "q1",     "q2",     "q3",     "q4",     "q5",    "w_db"};

}  // namespace

std::string_view param_name(int index) {
  if (index < 0 || index >= kParamCount) throw ConfigError("parameter index out of range");
  return kNames[static_cast<std::size_t>(index)];
}

int param_index(std::string_view name) {
  for (int i = 0; i < kParamCount; ++i) {
    if (kNames[static_cast<std::size_t>(i)] == name) return i;
  }
  return -1;
}

bool is_log_param(int index) {
  return (index >= kAlpha1 && index <= kAlpha4) || (index >= kQ1 && index <= kQ5);
}

double GncParams::physical(int i) const {
  const double x = (*this)[i];
  return is_log_param(i) ? std::pow(10.0, x) : x;
}

std::array<double, 4> GncParams::alpha() const {
  return {physical(kAlpha1), physical(kAlpha2), physical(kAlpha3), physical(kAlpha4)};
}

std::array<double, 5> GncParams::q() const {
  return {physical(kQ1), physical(kQ2), physical(kQ3), physical(kQ4), physical(kQ5)};
}

bool ParamBounds::contains(const GncParams& a, double tol) const {
  for (int i = 0; i < kParamCount; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!(a.value[k] >= lo[k] - tol && a.value[k] <= hi[k] + tol)) return false;
  }
  return true;
}

void ParamBounds::validate() const {
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]) || !(lo[k] < hi[k])) {
      throw ConfigError("invalid bounds for parameter " +
                        std::string(kNames[k]));
    }
  }
}

ParamBounds default_bounds(double r_plan_max) {
  ParamBounds b;
  for (int i = kAlpha1; i <= kAlpha4; ++i) {
    b.lo[i] = -8.0;
    b.hi[i] = 0.0;
  }
  b.lo[kSurgeRef] = 0.2;
  b.hi[kSurgeRef] = 1.0;
  b.lo[kPlanRadius] = 1.0;
  b.hi[kPlanRadius] = r_plan_max;
  b.lo[kLookahead] = 1.0;
  b.hi[kLookahead] = 100.0;
  for (int i = kQ1; i <= kQ5; ++i) {
    b.lo[i] = -5.0;
    b.hi[i] = 3.0;
  }
  b.lo[kDeadband] = 0.0;
  b.hi[kDeadband] = 0.3;
  return b;
}

std::string_view to_string(ParamMask mask) {
  switch (mask) {
    case ParamMask::kPlan: return "plan";
    case ParamMask::kControl: return "control";
    case ParamMask::kFilter: return "filter";
    case ParamMask::kAll: return "all";
  }
  return "all";
}

ParamMask parse_mask(std::string_view text) {
  if (text == "plan") return ParamMask::kPlan;
  if (text == "control") return ParamMask::kControl;
  if (text == "filter") return ParamMask::kFilter;
  if (text == "all") return ParamMask::kAll;
  throw ConfigError("unknown parameter mask '" + std::string(text) + "'");
}

std::vector<int> mask_indices(ParamMask mask) {
  switch (mask) {
    case ParamMask::kPlan: return {kSurgeRef, kPlanRadius, kLookahead};
    case ParamMask::kControl: return {kQ1, kQ2, kQ3, kQ4, kQ5, kDeadband};
    case ParamMask::kFilter: return {kAlpha1, kAlpha2, kAlpha3, kAlpha4};
    case ParamMask::kAll: break;
  }
  std::vector<int> all(kParamCount);
  for (int i = 0; i < kParamCount; ++i) all[static_cast<std::size_t>(i)] = i;
  return all;
}

ParamSpace::ParamSpace(ParamBounds bounds, std::vector<int> active, GncParams base)
    : bounds_(bounds), active_(std::move(active)), base_(base) {
  bounds_.validate();
  if (active_.empty()) throw ConfigError("parameter space needs at least one active entry");
  std::vector<int> sorted = active_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.front() < 0 ||
      sorted.back() >= kParamCount) {
    throw ConfigError("active parameter indices must be unique and in range");
  }
  for (int i = 0; i < kParamCount; ++i) {
    const auto k = static_cast<std::size_t>(i);
    base_.value[k] = std::clamp(base_.value[k], bounds_.lo[k], bounds_.hi[k]);
  }
}

Eigen::VectorXd ParamSpace::normalize(const GncParams& a) const {
  Eigen::VectorXd x(dimension());
  for (int i = 0; i < dimension(); ++i) {
    const auto k = static_cast<std::size_t>(active_[static_cast<std::size_t>(i)]);
    x[i] = (a.value[k] - bounds_.lo[k]) / (bounds_.hi[k] - bounds_.lo[k]);
  }
  return x;
}

GncParams ParamSpace::denormalize(const Eigen::VectorXd& x) const {
  if (x.size() != dimension()) throw ConfigError("normalized point has the wrong dimension");
  GncParams a = base_;
  for (int i = 0; i < dimension(); ++i) {
    const auto k = static_cast<std::size_t>(active_[static_cast<std::size_t>(i)]);
    const double t = std::clamp(x[i], 0.0, 1.0);
    a.value[k] = t == 1.0 ? bounds_.hi[k] : bounds_.lo[k] + t * (bounds_.hi[k] - bounds_.lo[k]);
  }
  return a;
}

FilterNoiseConfig filter_noise_of(const GncParams& a, const SensorConfig& sensors) {
  return FilterNoiseConfig::from_sensors(sensors, a.alpha());
}

ControllerConfig controller_config_of(const GncParams& a, ControllerConfig base) {
  base.q = a.q();
  base.deadband = a.deadband();
  base.working_point.surge = a.surge_ref();
  return base;
}

GuidanceConfig guidance_config_of(const GncParams& a, GuidanceConfig base) {
  base.lookahead = a.lookahead();
  return base;
}

}  // namespace auvtune
