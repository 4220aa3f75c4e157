#pragma once

namespace auvtune {

struct GuidanceConfig {
  double lookahead = 10.0;  // Delta, shared by the horizontal and vertical channels (m)
  double glide_max = 0.2;   // pitch reference clamp (rad)
  double surge_floor = 0.05;  // below this |u_hat| the sideslip estimate is zero (m/s)
};

/// Line-of-sight yaw reference with sideslip compensation:
/// psi_d = gamma_p + atan(-h_e / Delta) - beta_est, wrapped to (-pi, pi].
double los_yaw(double path_course, double cross_track, double lookahead, double sideslip);

/// beta_est = atan(v/u) from the estimated body velocities, 0 when |u| < floor.
double sideslip_estimate(double u_hat, double v_hat, double surge_floor = 0.05);

/// Vertical analogue without sideslip, clamped to +-glide_max. `vertical_error`
/// is d_ref - d (positive when the vehicle is shallower than the path).
double los_pitch(double path_pitch, double vertical_error, double lookahead, double glide_max);

}  // namespace auvtune
