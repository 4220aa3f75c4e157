#include "auvtune/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "auvtune/common.hpp"

namespace auvtune {

double los_yaw(double path_course, double cross_track, double lookahead, double sideslip) {
  if (!(lookahead > 0.0)) throw ConfigError("lookahead distance must be positive");
  return wrap_angle(path_course + std::atan(-cross_track / lookahead) - sideslip);
}

double sideslip_estimate(double u_hat, double v_hat, double surge_floor) {
  if (std::abs(u_hat) < surge_floor) return 0.0;
  return std::atan(v_hat / u_hat);
}

double los_pitch(double path_pitch, double vertical_error, double lookahead, double glide_max) {
  if (!(lookahead > 0.0)) throw ConfigError("lookahead distance must be positive");
  const double theta = path_pitch + std::atan(-vertical_error / lookahead);
  return std::clamp(theta, -glide_max, glide_max);
}

}  // namespace auvtune
