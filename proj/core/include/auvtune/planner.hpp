#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "auvtune/common.hpp"

namespace auvtune {

/// Horizontal pose. The (n, e) plane is treated as a right-handed x-y plane,
/// so a positive turn increases psi (clockwise seen from above in NED).
struct Pose2 {
  double n = 0.0;
  double e = 0.0;
  double psi = 0.0;
};

/// A straight (curvature 0) or circular arc segment of constant curvature.
struct PathSegment {
  Pose2 start;
  double length = 0.0;
  double curvature = 0.0;

  Pose2 at(double s) const;
  Pose2 end() const { return at(length); }
};

enum class DubinsWord { kLSL, kRSR, kLSR, kRSL, kRLR, kLRL };
inline constexpr std::array<DubinsWord, 6> kAllDubinsWords{
    DubinsWord::kLSL, DubinsWord::kRSR, DubinsWord::kLSR,
    DubinsWord::kRSL, DubinsWord::kRLR, DubinsWord::kLRL};

std::string_view to_string(DubinsWord word);

struct DubinsPath {
  Pose2 start;
  double radius = 1.0;
  DubinsWord word = DubinsWord::kLSL;
  std::array<double, 3> normalized{};  // segment lengths divided by radius

  double length() const { return radius * (normalized[0] + normalized[1] + normalized[2]); }
  /// Non-degenerate segments of the path (zero-length pieces dropped).
  std::vector<PathSegment> segments() const;
};

/// One specific word between two poses, or nullopt when it does not exist.
std::optional<DubinsPath> dubins_word(const Pose2& start, const Pose2& goal, double radius,
                                      DubinsWord word);

/// Shortest of the six Dubins words. Poses closer than 1e-6 m yield a
/// zero-length path. Throws ConfigError for a non-positive radius.
DubinsPath dubins_shortest(const Pose2& start, const Pose2& goal, double radius);

struct Waypoint {
  double n = 0.0;
  double e = 0.0;
  double d = 0.0;
};

/// Raised by build_reference when a leg is steeper than the glide limit.
class GlideViolation : public ConfigError {
 public:
  GlideViolation(int leg, double angle, double limit);
  int leg() const { return leg_; }

 private:
  int leg_;
};

struct PathSample {
  double n = 0.0;
  double e = 0.0;
  double d = 0.0;
  double course = 0.0;      // horizontal tangent angle gamma_p
  double path_pitch = 0.0;  // nose-up positive, -atan(dd/ds)
};

/// Planar Dubins legs through the waypoints with depth linear in arclength
/// per leg and a constant surge reference.
class ReferencePath {
 public:
  ReferencePath() = default;
  ReferencePath(std::vector<PathSegment> segments, std::vector<double> leg_start,
                std::vector<double> leg_depth, double r_plan, double u_ref);

  const std::vector<PathSegment>& segments() const { return segments_; }
  double length() const { return total_; }
  double r_plan() const { return r_plan_; }
  double u_ref() const { return u_ref_; }
  std::size_t leg_count() const { return leg_depth_.empty() ? 0 : leg_depth_.size() - 1; }
  /// Arclength at which leg i starts; leg_start(leg_count()) == length().
  double leg_start(std::size_t leg) const { return leg_start_[leg]; }
  std::size_t segment_at(double s) const;
  double segment_start(std::size_t i) const { return segment_start_[i]; }

  PathSample sample(double s) const;
  double depth_at(double s) const;

 private:
  std::vector<PathSegment> segments_;
  std::vector<double> segment_start_;
  std::vector<double> leg_start_;
  std::vector<double> leg_depth_;
  double total_ = 0.0;
  double r_plan_ = 1.0;
  double u_ref_ = 0.5;
};

/// Chains Dubins paths through the waypoints. Each waypoint's heading is the
/// bearing to the next one; the last waypoint keeps the bearing of its leg.
ReferencePath build_reference(const std::vector<Waypoint>& waypoints, double r_plan, double u_ref,
                              double glide_max);

struct Projection {
  double s = 0.0;
  double cross_track = 0.0;  // h_e, positive to starboard of the path
  double course = 0.0;       // gamma_p at s
  PathSample point;
};

/// Windowed closest-point search with a monotone cursor: each query searches
/// [s_prev, s_prev + 4 r_plan] so the cursor never moves backwards.
class PathTracker {
 public:
  explicit PathTracker(const ReferencePath& path);

  Projection project(double n, double e);
  double cursor() const { return cursor_; }
  double window() const { return window_; }

 private:
  const ReferencePath* path_;
  double cursor_ = 0.0;
  double window_;
};

/// Closest point to (n, e) on one segment restricted to local arclength [lo, hi].
double closest_on_segment(const PathSegment& seg, double n, double e, double lo, double hi);

}  // namespace auvtune
