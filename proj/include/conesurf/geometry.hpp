// Planar vectors, rigid motions and the handful of predicates the surface
// code needs. Everything is double precision; tolerances are passed in by the
// caller rather than baked into the predicates.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace conesurf {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline Vec2 normalized(Vec2 v) { return v / norm(v); }
/// Counterclockwise quarter turn.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }
inline bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Angle of v in (-pi, pi].
inline double angle_of(Vec2 v) { return std::atan2(v.y, v.x); }

/// Wraps an angle into [0, period).
inline double wrap_angle(double a, double period = kTwoPi) {
  double r = std::fmod(a, period);
  if (r < 0) r += period;
  if (r >= period) r -= period;
  return r;
}

/// Counterclockwise angle from u to v, in [0, 2pi).
inline double ccw_angle(Vec2 u, Vec2 v) {
  return wrap_angle(std::atan2(cross(u, v), dot(u, v)));
}

/// Orientation-preserving rigid motion p -> R p + t.
struct Isometry {
  double c = 1.0;
  double s = 0.0;
  Vec2 t{};

  static Isometry identity() { return {}; }

  static Isometry rotation_about(Vec2 center, double angle) {
    Isometry r{std::cos(angle), std::sin(angle), {}};
    r.t = center - r.apply_dir(center);
    return r;
  }

  /// Maps segment p0->p1 onto q1->q0 (reversed traversal), which is how two
  /// glued polygon edges are identified. The rotation is fixed by the edge
  /// directions; the translation sends p0 to q1.
  static Isometry edge_to_edge(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1) {
    const Vec2 u = normalized(p1 - p0);
    const Vec2 v = normalized(q0 - q1);
    Isometry r{dot(u, v), cross(u, v), {}};
    r.t = q1 - r.apply_dir(p0);
    return r;
  }

  Vec2 apply_dir(Vec2 v) const { return {c * v.x - s * v.y, s * v.x + c * v.y}; }
  Vec2 apply(Vec2 p) const { return apply_dir(p) + t; }
  double angle() const { return std::atan2(s, c); }

  Isometry inverse() const {
    Isometry r{c, -s, {}};
    r.t = -r.apply_dir(t);
    return r;
  }
};

/// (a * b)(p) = a(b(p)).
inline Isometry operator*(const Isometry& a, const Isometry& b) {
  Isometry r{a.c * b.c - a.s * b.s, a.s * b.c + a.c * b.s, {}};
  r.t = a.apply(b.t);
  return r;
}

inline double distance_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + ab * t));
}

/// Parameter in [0,1] of the point of segment a-b closest to p.
inline double closest_parameter(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return 0.0;
  return std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
}

inline double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    a += cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * a;
}

/// True when segments [a,b] and [c,d] share a point other than possibly
/// endpoints that are within `tol` of each other. Collinear overlap counts.
inline bool segments_touch(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double tol) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  const double s1 = norm(b - a) * tol;
  const double s2 = norm(d - c) * tol;
  const bool straddle_ab = (d1 > s1 && d2 < -s1) || (d1 < -s1 && d2 > s1);
  const bool straddle_cd = (d3 > s2 && d4 < -s2) || (d3 < -s2 && d4 > s2);
  if (straddle_ab && straddle_cd) return true;
  if (distance_point_segment(c, a, b) <= tol) return true;
  if (distance_point_segment(d, a, b) <= tol) return true;
  if (distance_point_segment(a, c, d) <= tol) return true;
  if (distance_point_segment(b, c, d) <= tol) return true;
  return false;
}

/// Proper crossing: the open segments intersect at a single interior point.
inline bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double tol) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  const double s1 = norm(b - a) * tol;
  const double s2 = norm(d - c) * tol;
  return ((d1 > s1 && d2 < -s1) || (d1 < -s1 && d2 > s1)) &&
         ((d3 > s2 && d4 < -s2) || (d3 < -s2 && d4 > s2));
}

inline bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) &&
        p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

inline double polygon_diameter(std::span<const Vec2> poly) {
  double d = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j) d = std::max(d, norm(poly[i] - poly[j]));
  return d;
}

inline Vec2 polygon_centroid(std::span<const Vec2> poly) {
  double a = 0.0;
  Vec2 c{};
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % poly.size()];
    const double w = cross(p, q);
    a += w;
    c += (p + q) * w;
  }
  return c / (3.0 * a);
}

}  // namespace conesurf
