#include "cfmargin/geometry.hpp"

#include <algorithm>
#include <limits>

namespace cfmargin {

double angle_diff(double a, double b) {
  double d = std::fmod(a - b, 2.0 * M_PI);
  if (d > M_PI) d -= 2.0 * M_PI;
  if (d <= -M_PI) d += 2.0 * M_PI;
  return d;
}

std::vector<Vec2> Obb::corners() const {
  const Vec2 u = heading_dir(heading);
  const Vec2 v{-u.y, u.x};
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  return {
      center + u * hl + v * hw,
      center + u * hl - v * hw,
      center - u * hl - v * hw,
      center - u * hl + v * hw,
  };
}

Vec2 Obb::to_body(Vec2 p) const {
  const Vec2 d = p - center;
  const Vec2 u = heading_dir(heading);
  const Vec2 v{-u.y, u.x};  // left normal
  return {d.dot(u), d.dot(v)};
}

bool Obb::contains(Vec2 p) const {
  const Vec2 b = to_body(p);
  return std::abs(b.x) <= 0.5 * length && std::abs(b.y) <= 0.5 * width;
}

namespace {

// Max over the 4 box axes of (center distance projection - summed half extents).
// Positive max = separated; negative = penetration (MTV depth for rectangles).
double sat_margin(const Obb& a, const Obb& b) {
  const Vec2 axes[4] = {
      heading_dir(a.heading),
      {-std::sin(a.heading), std::cos(a.heading)},
      heading_dir(b.heading),
      {-std::sin(b.heading), std::cos(b.heading)},
  };
  const double ext_a[2] = {0.5 * a.length, 0.5 * a.width};
  const double ext_b[2] = {0.5 * b.length, 0.5 * b.width};
  const Vec2 d = b.center - a.center;

  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const Vec2 ax = axes[i];
    const double ra = ext_a[0] * std::abs(ax.dot(axes[0])) + ext_a[1] * std::abs(ax.dot(axes[1]));
    const double rb = ext_b[0] * std::abs(ax.dot(axes[2])) + ext_b[1] * std::abs(ax.dot(axes[3]));
    const double gap = std::abs(d.dot(ax)) - (ra + rb);
    best = std::max(best, gap);
  }
  return best;
}

}  // namespace

bool obb_intersect(const Obb& a, const Obb& b) { return sat_margin(a, b) <= 0.0; }

double obb_separation(const Obb& a, const Obb& b) { return sat_margin(a, b); }

Vec2 obb_overlap_centroid(const Obb& a, const Obb& b) {
  // Clip polygon a against each half-plane edge of b.
  std::vector<Vec2> poly = a.corners();
  const std::vector<Vec2> clip = b.corners();
  for (std::size_t i = 0; i < clip.size() && !poly.empty(); ++i) {
    const Vec2 p0 = clip[i];
    const Vec2 p1 = clip[(i + 1) % clip.size()];
    const Vec2 edge = p1 - p0;
    std::vector<Vec2> out;
    out.reserve(poly.size() + 2);
    for (std::size_t j = 0; j < poly.size(); ++j) {
      const Vec2 cur = poly[j];
      const Vec2 nxt = poly[(j + 1) % poly.size()];
      const bool cur_in = edge.cross(cur - p0) >= 0.0;
      const bool nxt_in = edge.cross(nxt - p0) >= 0.0;
      if (cur_in) out.push_back(cur);
      if (cur_in != nxt_in) {
        const double denom = edge.cross(nxt - cur);
        if (std::abs(denom) > 1e-12) {
          const double t = edge.cross(p0 - cur) / denom;
          out.push_back(cur + (nxt - cur) * t);
        }
      }
    }
    poly = std::move(out);
  }
  if (poly.empty()) return (a.center + b.center) * 0.5;

  // Area-weighted centroid; fall back to vertex mean for slivers.
  double area2 = 0.0;
  Vec2 acc{0.0, 0.0};
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % poly.size()];
    const double c = p.cross(q);
    area2 += c;
    acc = acc + (p + q) * c;
  }
  if (std::abs(area2) < 1e-12) {
    Vec2 mean{0.0, 0.0};
    for (const Vec2& p : poly) mean = mean + p;
    return mean * (1.0 / static_cast<double>(poly.size()));
  }
  return acc * (1.0 / (3.0 * area2));
}

Polyline::Polyline(std::vector<Vec2> pts) : pts_(std::move(pts)) {
  cum_.resize(pts_.size(), 0.0);
  for (std::size_t i = 1; i < pts_.size(); ++i) {
    cum_[i] = cum_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
  }
}

double Polyline::project(Vec2 p) const {
  double best_d = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
    const Vec2 a = pts_[i];
    const Vec2 b = pts_[i + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.norm_sq();
    double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 q = a + ab * t;
    const double d = (p - q).norm_sq();
    if (d < best_d) {
      best_d = d;
      best_s = cum_[i] + std::sqrt(len2) * t;
    }
  }
  return best_s;
}

double Polyline::lateral_at(Vec2 p) const {
  const double s = project(p);
  const Vec2 q = point_at(s);
  const double h = heading_at(s);
  const Vec2 t = heading_dir(h);
  return t.cross(p - q);
}

std::size_t Polyline::segment_of(double s) const {
  // Last segment whose start arclength is <= s.
  std::size_t lo = 0;
  std::size_t hi = pts_.size() >= 2 ? pts_.size() - 2 : 0;
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (cum_[mid] <= s) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

Vec2 Polyline::point_at(double s) const {
  if (pts_.size() < 2) return pts_.empty() ? Vec2{} : pts_[0];
  const std::size_t i = segment_of(std::clamp(s, 0.0, length()));
  const Vec2 a = pts_[i];
  const Vec2 b = pts_[i + 1];
  const double seg = cum_[i + 1] - cum_[i];
  const double t = seg > 0.0 ? (s - cum_[i]) / seg : 0.0;  // t outside [0,1] extrapolates
  return a + (b - a) * t;
}

double Polyline::heading_at(double s) const {
  if (pts_.size() < 2) return 0.0;
  const std::size_t i = segment_of(std::clamp(s, 0.0, length()));
  const Vec2 d = pts_[i + 1] - pts_[i];
  return std::atan2(d.y, d.x);
}

}  // namespace cfmargin
