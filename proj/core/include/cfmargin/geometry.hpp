#pragma once

#include <cmath>
#include <vector>

namespace cfmargin {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double norm_sq() const { return x * x + y * y; }
};

inline Vec2 heading_dir(double heading) { return {std::cos(heading), std::sin(heading)}; }

/// Smallest signed angle a-b, in (-pi, pi].
double angle_diff(double a, double b);

/// Oriented rectangle (vehicle footprint): center, heading, full extents.
struct Obb {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;  // along heading
  double width = 0.0;

  std::vector<Vec2> corners() const;
  /// World point -> body frame (x forward, y left).
  Vec2 to_body(Vec2 p) const;
  bool contains(Vec2 p) const;
};

/// Separating-axis overlap test for two oriented rectangles.
bool obb_intersect(const Obb& a, const Obb& b);

/// Signed separation: positive = guaranteed gap of at least that much,
/// negative = penetration depth (minimum translation to separate).
double obb_separation(const Obb& a, const Obb& b);

/// Centroid of the overlap region (Sutherland-Hodgman clip). Falls back to
/// the midpoint of the centers for degenerate (touching) configurations.
Vec2 obb_overlap_centroid(const Obb& a, const Obb& b);

/// Polyline with cumulative arclength; supports projection and sampling.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> pts);

  const std::vector<Vec2>& points() const { return pts_; }
  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
  bool empty() const { return pts_.size() < 2; }

  /// Arclength of the closest point on the polyline.
  double project(Vec2 p) const;
  /// Signed lateral offset at the projection (positive = left of path).
  double lateral_at(Vec2 p) const;
  /// Point at arclength s; extrapolates beyond the ends.
  Vec2 point_at(double s) const;
  /// Tangent heading at arclength s.
  double heading_at(double s) const;

 private:
  std::vector<Vec2> pts_;
  std::vector<double> cum_;
  std::size_t segment_of(double s) const;
};

}  // namespace cfmargin
