#include "auvtune/planner.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace auvtune {

namespace {

double mod2pi(double a) {
  double m = std::fmod(a, 2.0 * kPi);
  if (m < 0.0) m += 2.0 * kPi;
  // fmod can return 2 pi - tiny; fold values within rounding of a full turn to 0.
  if (m >= 2.0 * kPi - 1e-15) m = 0.0;
  return m;
}

/// Curvature signs of the three pieces, +1 = L, -1 = R, 0 = S.
std::array<int, 3> word_signs(DubinsWord w) {
  switch (w) {
    case DubinsWord::kLSL: return {1, 0, 1};
    case DubinsWord::kRSR: return {-1, 0, -1};
    case DubinsWord::kLSR: return {1, 0, -1};
    case DubinsWord::kRSL: return {-1, 0, 1};
    case DubinsWord::kRLR: return {-1, 1, -1};
    case DubinsWord::kLRL: return {1, -1, 1};
  }
  return {0, 0, 0};
}

struct WordInput {
  double alpha, beta, d;
  double sa, sb, ca, cb, c_ab, d_sq;
};

std::optional<std::array<double, 3>> solve_word(const WordInput& in, DubinsWord w) {
  switch (w) {
    case DubinsWord::kLSL: {
      const double tmp0 = in.d + in.sa - in.sb;
      const double p_sq = 2.0 + in.d_sq - 2.0 * in.c_ab + 2.0 * in.d * (in.sa - in.sb);
      if (p_sq < 0.0) return std::nullopt;
      const double tmp1 = std::atan2(in.cb - in.ca, tmp0);
      return std::array<double, 3>{mod2pi(tmp1 - in.alpha), std::sqrt(p_sq),
                                   mod2pi(in.beta - tmp1)};
    }
    case DubinsWord::kRSR: {
      const double tmp0 = in.d - in.sa + in.sb;
      const double p_sq = 2.0 + in.d_sq - 2.0 * in.c_ab + 2.0 * in.d * (in.sb - in.sa);
      if (p_sq < 0.0) return std::nullopt;
      const double tmp1 = std::atan2(in.ca - in.cb, tmp0);
      return std::array<double, 3>{mod2pi(in.alpha - tmp1), std::sqrt(p_sq),
                                   mod2pi(tmp1 - in.beta)};
    }
    case DubinsWord::kLSR: {
      const double p_sq = -2.0 + in.d_sq + 2.0 * in.c_ab + 2.0 * in.d * (in.sa + in.sb);
      if (p_sq < 0.0) return std::nullopt;
      const double p = std::sqrt(p_sq);
      const double tmp0 =
          std::atan2(-in.ca - in.cb, in.d + in.sa + in.sb) - std::atan2(-2.0, p);
      return std::array<double, 3>{mod2pi(tmp0 - in.alpha), p, mod2pi(tmp0 - in.beta)};
    }
    case DubinsWord::kRSL: {
      const double p_sq = -2.0 + in.d_sq + 2.0 * in.c_ab - 2.0 * in.d * (in.sa + in.sb);
      if (p_sq < 0.0) return std::nullopt;
      const double p = std::sqrt(p_sq);
      const double tmp0 = std::atan2(in.ca + in.cb, in.d - in.sa - in.sb) - std::atan2(2.0, p);
      return std::array<double, 3>{mod2pi(in.alpha - tmp0), p, mod2pi(in.beta - tmp0)};
    }
    case DubinsWord::kRLR: {
      const double tmp0 =
          (6.0 - in.d_sq + 2.0 * in.c_ab + 2.0 * in.d * (in.sa - in.sb)) / 8.0;
      if (std::abs(tmp0) > 1.0) return std::nullopt;
      const double phi = std::atan2(in.ca - in.cb, in.d - in.sa + in.sb);
      const double p = mod2pi(2.0 * kPi - std::acos(tmp0));
      const double t = mod2pi(in.alpha - phi + mod2pi(p / 2.0));
      return std::array<double, 3>{t, p, mod2pi(in.alpha - in.beta - t + mod2pi(p))};
    }
    case DubinsWord::kLRL: {
      const double tmp0 =
          (6.0 - in.d_sq + 2.0 * in.c_ab + 2.0 * in.d * (in.sb - in.sa)) / 8.0;
      if (std::abs(tmp0) > 1.0) return std::nullopt;
      const double phi = std::atan2(in.ca - in.cb, in.d + in.sa - in.sb);
      const double p = mod2pi(2.0 * kPi - std::acos(tmp0));
      const double t = mod2pi(-in.alpha - phi + p / 2.0);
      return std::array<double, 3>{t, p, mod2pi(in.beta - in.alpha - t + mod2pi(p))};
    }
  }
  return std::nullopt;
}

bool reaches(const DubinsPath& path, const Pose2& goal) {
  Pose2 end = path.start;
  for (const auto& seg : path.segments()) end = seg.end();
  const double tol = 1e-6 * std::max(1.0, path.radius);
  return std::hypot(end.n - goal.n, end.e - goal.e) < tol &&
         std::abs(wrap_angle(end.psi - goal.psi)) < 1e-6;
}

}  // namespace

Pose2 PathSegment::at(double s) const {
  if (std::abs(curvature) < 1e-15) {
    return {start.n + s * std::cos(start.psi), start.e + s * std::sin(start.psi), start.psi};
  }
  const double psi = start.psi + curvature * s;
  return {start.n + (std::sin(psi) - std::sin(start.psi)) / curvature,
          start.e - (std::cos(psi) - std::cos(start.psi)) / curvature, wrap_angle(psi)};
}

std::string_view to_string(DubinsWord word) {
  switch (word) {
    case DubinsWord::kLSL: return "LSL";
    case DubinsWord::kRSR: return "RSR";
    case DubinsWord::kLSR: return "LSR";
    case DubinsWord::kRSL: return "RSL";
    case DubinsWord::kRLR: return "RLR";
    case DubinsWord::kLRL: return "LRL";
  }
  return "?";
}

std::vector<PathSegment> DubinsPath::segments() const {
  std::vector<PathSegment> out;
  const auto signs = word_signs(word);
  Pose2 pose = start;
  for (int i = 0; i < 3; ++i) {
    PathSegment seg{pose, normalized[i] * radius, signs[i] / radius};
    pose = seg.end();
    if (seg.length > 1e-12) out.push_back(seg);
  }
  return out;
}

std::optional<DubinsPath> dubins_word(const Pose2& start, const Pose2& goal, double radius,
                                      DubinsWord word) {
  if (!(radius > 0.0)) throw ConfigError("Dubins radius must be positive");
  const double dn = goal.n - start.n;
  const double de = goal.e - start.e;
  const double dist = std::hypot(dn, de);
  const double theta = dist > 0.0 ? mod2pi(std::atan2(de, dn)) : 0.0;
  WordInput in{};
  in.alpha = mod2pi(start.psi - theta);
  in.beta = mod2pi(goal.psi - theta);
  in.d = dist / radius;
  in.sa = std::sin(in.alpha);
  in.sb = std::sin(in.beta);
  in.ca = std::cos(in.alpha);
  in.cb = std::cos(in.beta);
  in.c_ab = std::cos(in.alpha - in.beta);
  in.d_sq = in.d * in.d;

  const auto lengths = solve_word(in, word);
  if (!lengths) return std::nullopt;
  DubinsPath path{start, radius, word, *lengths};
  if (!reaches(path, goal)) return std::nullopt;
  return path;
}

DubinsPath dubins_shortest(const Pose2& start, const Pose2& goal, double radius) {
  if (!(radius > 0.0)) throw ConfigError("Dubins radius must be positive");
  DubinsPath best{start, radius, DubinsWord::kLSL, {0.0, 0.0, 0.0}};
  if (std::hypot(goal.n - start.n, goal.e - start.e) < 1e-6) return best;
  double best_len = std::numeric_limits<double>::infinity();
  for (DubinsWord w : kAllDubinsWords) {
    if (auto p = dubins_word(start, goal, radius, w); p && p->length() < best_len) {
      best_len = p->length();
      best = *p;
    }
  }
  if (!std::isfinite(best_len)) {
    throw ConfigError("no Dubins word connects the given poses");
  }
  return best;
}

GlideViolation::GlideViolation(int leg, double angle, double limit)
    : ConfigError([&] {
        std::ostringstream msg;
        msg << "leg " << leg << " glide angle " << angle * 180.0 / kPi << " deg exceeds limit "
            << limit * 180.0 / kPi << " deg";
        return msg.str();
      }()),
      leg_(leg) {}

ReferencePath::ReferencePath(std::vector<PathSegment> segments, std::vector<double> leg_start,
                             std::vector<double> leg_depth, double r_plan, double u_ref)
    : segments_(std::move(segments)),
      leg_start_(std::move(leg_start)),
      leg_depth_(std::move(leg_depth)),
      r_plan_(r_plan),
      u_ref_(u_ref) {
  segment_start_.reserve(segments_.size());
  double s = 0.0;
  for (const auto& seg : segments_) {
    segment_start_.push_back(s);
    s += seg.length;
  }
  total_ = s;
}

std::size_t ReferencePath::segment_at(double s) const {
  if (segments_.empty()) return 0;
  auto it = std::upper_bound(segment_start_.begin(), segment_start_.end(), s);
  std::size_t i = it == segment_start_.begin() ? 0 : static_cast<std::size_t>(it - segment_start_.begin()) - 1;
  return std::min(i, segments_.size() - 1);
}

double ReferencePath::depth_at(double s) const {
  if (leg_depth_.empty()) return 0.0;
  if (leg_depth_.size() == 1) return leg_depth_.front();
  s = std::clamp(s, 0.0, total_);
  auto it = std::upper_bound(leg_start_.begin(), leg_start_.end(), s);
  std::size_t leg = it == leg_start_.begin() ? 0 : static_cast<std::size_t>(it - leg_start_.begin()) - 1;
  leg = std::min(leg, leg_count() - 1);
  const double len = leg_start_[leg + 1] - leg_start_[leg];
  if (len <= 0.0) return leg_depth_[leg + 1];
  const double frac = (s - leg_start_[leg]) / len;
  return leg_depth_[leg] + frac * (leg_depth_[leg + 1] - leg_depth_[leg]);
}

PathSample ReferencePath::sample(double s) const {
  PathSample out;
  s = std::clamp(s, 0.0, total_);
  if (!segments_.empty()) {
    const std::size_t i = segment_at(s);
    const Pose2 p = segments_[i].at(std::min(s - segment_start_[i], segments_[i].length));
    out.n = p.n;
    out.e = p.e;
    out.course = p.psi;
  }
  out.d = depth_at(s);
  if (leg_count() > 0) {
    auto it = std::upper_bound(leg_start_.begin(), leg_start_.end(), s);
    std::size_t leg = it == leg_start_.begin() ? 0 : static_cast<std::size_t>(it - leg_start_.begin()) - 1;
    leg = std::min(leg, leg_count() - 1);
    const double len = leg_start_[leg + 1] - leg_start_[leg];
    if (len > 0.0) out.path_pitch = -std::atan((leg_depth_[leg + 1] - leg_depth_[leg]) / len);
  }
  return out;
}

ReferencePath build_reference(const std::vector<Waypoint>& wps, double r_plan, double u_ref,
                              double glide_max) {
  if (wps.size() < 2) throw ConfigError("reference path needs at least two waypoints");
  if (!(r_plan > 0.0)) throw ConfigError("r_plan must be positive");
  if (!(glide_max > 0.0)) throw ConfigError("glide limit must be positive");

  const std::size_t legs = wps.size() - 1;
  for (std::size_t i = 0; i < legs; ++i) {
    const double horiz = std::hypot(wps[i + 1].n - wps[i].n, wps[i + 1].e - wps[i].e);
    const double angle = std::atan2(std::abs(wps[i + 1].d - wps[i].d), horiz);
    if (angle > glide_max + 1e-12) throw GlideViolation(static_cast<int>(i), angle, glide_max);
  }

  auto bearing = [&](std::size_t from, std::size_t to) {
    return std::atan2(wps[to].e - wps[from].e, wps[to].n - wps[from].n);
  };
  std::vector<double> heading(wps.size());
  for (std::size_t i = 0; i < legs; ++i) heading[i] = bearing(i, i + 1);
  heading[legs] = bearing(legs - 1, legs);

  std::vector<PathSegment> segments;
  std::vector<double> leg_start{0.0};
  std::vector<double> leg_depth{wps[0].d};
  double s = 0.0;
  for (std::size_t i = 0; i < legs; ++i) {
    const Pose2 a{wps[i].n, wps[i].e, heading[i]};
    const Pose2 b{wps[i + 1].n, wps[i + 1].e, heading[i + 1]};
    const DubinsPath leg = dubins_shortest(a, b, r_plan);
    for (const auto& seg : leg.segments()) {
      segments.push_back(seg);
      s += seg.length;
    }
    leg_start.push_back(s);
    leg_depth.push_back(wps[i + 1].d);
  }
  return ReferencePath(std::move(segments), std::move(leg_start), std::move(leg_depth), r_plan,
                       u_ref);
}

double closest_on_segment(const PathSegment& seg, double n, double e, double lo, double hi) {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, seg.length);
  if (hi <= lo) return lo;
  auto dist2 = [&](double s) {
    const Pose2 p = seg.at(s);
    return (p.n - n) * (p.n - n) + (p.e - e) * (p.e - e);
  };
  if (std::abs(seg.curvature) < 1e-15) {
    const double t = (n - seg.start.n) * std::cos(seg.start.psi) +
                     (e - seg.start.e) * std::sin(seg.start.psi);
    return std::clamp(t, lo, hi);
  }
  const double rho = 1.0 / seg.curvature;
  const double cn = seg.start.n - rho * std::sin(seg.start.psi);
  const double ce = seg.start.e + rho * std::cos(seg.start.psi);
  const double phi = std::atan2(e - ce, n - cn);
  // Heading of the arc point whose radius vector points at (n, e).
  const double psi = seg.curvature > 0.0 ? phi + 0.5 * kPi : phi - 0.5 * kPi;
  const double radius = std::abs(rho);
  const double s0 = mod2pi((seg.curvature > 0.0 ? 1.0 : -1.0) * (psi - seg.start.psi)) * radius;
  const double period = 2.0 * kPi * radius;
  double best = lo;
  double best_d2 = dist2(lo);
  for (double cand : {hi, s0, s0 - period, s0 + period}) {
    cand = std::clamp(cand, lo, hi);
    const double d2 = dist2(cand);
    if (d2 < best_d2 - 1e-15) {
      best = cand;
      best_d2 = d2;
    }
  }
  return best;
}

PathTracker::PathTracker(const ReferencePath& path)
    : path_(&path), window_(4.0 * path.r_plan()) {}

Projection PathTracker::project(double n, double e) {
  const auto& segs = path_->segments();
  const double lo = cursor_;
  const double hi = std::min(cursor_ + window_, path_->length());
  double best_s = cursor_;
  double best_d2 = std::numeric_limits<double>::infinity();
  if (!segs.empty()) {
    for (std::size_t i = path_->segment_at(lo); i < segs.size(); ++i) {
      const double start = path_->segment_start(i);
      if (start > hi) break;
      const double local = closest_on_segment(segs[i], n, e, lo - start, hi - start);
      const Pose2 p = segs[i].at(local);
      const double d2 = (p.n - n) * (p.n - n) + (p.e - e) * (p.e - e);
      if (d2 < best_d2 - 1e-15) {
        best_d2 = d2;
        best_s = start + local;
      }
    }
  }
  cursor_ = std::max(cursor_, best_s);

  Projection out;
  out.s = cursor_;
  out.point = path_->sample(cursor_);
  out.course = out.point.course;
  out.cross_track = -(n - out.point.n) * std::sin(out.course) + (e - out.point.e) * std::cos(out.course);
  return out;
}

}  // namespace auvtune
