#include "safedrive/geometry.hpp"

#include <numbers>
#include <stdexcept>

namespace safedrive {

namespace {
constexpr double kPi = std::numbers::pi;
}

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("normalize_angle: non-finite angle");
  }
  double r = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) {
    r = kPi;
  }
  return r;
}

Vec2 heading_forward(double heading) { return {std::sin(heading), std::cos(heading)}; }

Vec2 heading_right(double heading) { return {std::cos(heading), -std::sin(heading)}; }

Vec2 world_to_ego(const Vec2& p, const Pose2& ego) {
  const Vec2 d = p - ego.position();
  return {heading_right(ego.heading).dot(d), heading_forward(ego.heading).dot(d)};
}

Vec2 ego_to_world(const Vec2& p, const Pose2& ego) {
  return ego.position() + heading_right(ego.heading) * p.x + heading_forward(ego.heading) * p.y;
}

std::vector<Vec2> OrientedBox::corners() const {
  const Vec2 fwd = heading_forward(heading) * half_length;
  const Vec2 right = heading_right(heading) * half_width;
  return {center + fwd + right, center + fwd - right, center - fwd - right, center - fwd + right};
}

namespace {

// Projected half-extent of a box onto unit axis u.
double projected_radius(const OrientedBox& b, const Vec2& u) {
  return b.half_length * std::abs(heading_forward(b.heading).dot(u)) +
         b.half_width * std::abs(heading_right(b.heading).dot(u));
}

bool separated_on_axis(const OrientedBox& a, const OrientedBox& b, const Vec2& u) {
  const double gap = std::abs((b.center - a.center).dot(u));
  return gap > projected_radius(a, u) + projected_radius(b, u);
}

}  // namespace

bool boxes_intersect(const OrientedBox& a, const OrientedBox& b) {
  const Vec2 axes[4] = {heading_forward(a.heading), heading_right(a.heading),
                        heading_forward(b.heading), heading_right(b.heading)};
  for (const Vec2& u : axes) {
    if (separated_on_axis(a, b, u)) {
      return false;
    }
  }
  return true;
}

double WaypointPath::total_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    len += (points[i] - points[i - 1]).norm();
  }
  return len;
}

PathSample path_point_at_arclength(const WaypointPath& path, double s) {
  if (path.points.size() < 2) {
    throw std::invalid_argument("path_point_at_arclength: path needs at least 2 points");
  }
  if (s < 0.0) {
    s = 0.0;
  }
  double heading = 0.0;
  double remaining = s;
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    const Vec2 seg = path.points[i] - path.points[i - 1];
    const double len = seg.norm();
    if (len > 0.0) {
      heading = std::atan2(seg.x, seg.y);
      if (remaining <= len) {
        const double f = remaining / len;
        return {path.points[i - 1] + seg * f, heading};
      }
    }
    remaining -= len;
  }
  return {path.points.back(), heading};
}

}  // namespace safedrive
