#pragma once

#include <cmath>
#include <vector>

namespace safedrive {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Wraps an angle into (-pi, pi]. Throws std::invalid_argument on non-finite input.
double normalize_angle(double theta);

// Headings are compass style: 0 points along +y (straight ahead in the ego
// frame), positive turns toward +x. The unit forward vector of heading h is
// (sin h, cos h).
struct Pose2 {
  double x = 0.0;        // m
  double y = 0.0;        // m
  double heading = 0.0;  // rad, in (-pi, pi]

  Vec2 position() const { return {x, y}; }
};

Vec2 heading_forward(double heading);
Vec2 heading_right(double heading);

// Ego frame: origin at the ego vehicle, +y forward, +x right.
Vec2 world_to_ego(const Vec2& p, const Pose2& ego);
Vec2 ego_to_world(const Vec2& p, const Pose2& ego);

// Box extents about the center: half_length along the heading axis,
// half_width across it.
struct BoxExtents {
  double half_length = 0.0;  // m
  double half_width = 0.0;   // m
};

struct OrientedBox {
  Vec2 center;
  double half_length = 0.0;  // m, > 0
  double half_width = 0.0;   // m, > 0
  double heading = 0.0;      // rad

  std::vector<Vec2> corners() const;
};

inline OrientedBox make_box(const Vec2& center, const BoxExtents& ext, double heading) {
  return OrientedBox{center, ext.half_length, ext.half_width, heading};
}

// Closed-set overlap test via the separating axis theorem on the four edge
// normals. Touching edges count as intersecting.
bool boxes_intersect(const OrientedBox& a, const OrientedBox& b);

struct WaypointPath {
  std::vector<Vec2> points;  // ego frame, ordered

  double total_length() const;
};

struct PathSample {
  Vec2 point;
  double heading = 0.0;  // tangent heading of the containing segment
};

// Linear interpolation along the polyline. s < 0 is treated as 0; s past the
// total length clamps to the final point with the final segment's heading.
// A zero-length segment inherits the previous segment's heading (0 if none).
// Throws std::invalid_argument if the path has fewer than 2 points.
PathSample path_point_at_arclength(const WaypointPath& path, double s);

}  // namespace safedrive
