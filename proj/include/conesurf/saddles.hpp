// Saddle connections by bounded unfolding. From a cone point P every chart
// copy reachable by straight rays of length <= L is laid out in the plane of
// the starting chart; each copy carries the angular window of directions
// from P that actually reach it. Singular corners seen strictly inside a
// window are the far ends of saddle connections.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "conesurf/error.hpp"
#include "conesurf/surface.hpp"
#include "conesurf/tracer.hpp"

namespace conesurf {

struct SaddleConnection {
  std::size_t start = 0;  // vertex class ids
  std::size_t end = 0;
  double length = 0.0;
  Vec2 holonomy{};  // developed displacement, in the start corner's chart frame
  TraceResult path;
  std::vector<std::size_t> interior_hits;  // large/marked classes passed straight through
  Corner start_corner{};
  Corner end_corner{};
  Vec2 start_direction{};  // unit, in the start corner's chart
  double start_angle = 0.0;  // cone coordinate of the outgoing ray at `start`
  double end_angle = 0.0;    // cone coordinate at `end` of the ray pointing back along the path
};

struct SaddleSearchOptions {
  std::size_t budget = 1'000'000;  // unfolded chart copies
  bool verify = true;              // re-trace every connection
};

struct SaddleSearch {
  std::vector<SaddleConnection> connections;
  std::size_t charts_unfolded = 0;
  std::size_t rejected = 0;  // candidates that failed re-tracing
};

namespace detail {

struct RayWindow {
  Vec2 lo;  // unit; the window sweeps counterclockwise from lo to hi, < pi
  Vec2 hi;
  bool lo_closed = false;
  bool hi_closed = false;
};

inline bool in_window(const RayWindow& w, Vec2 r, double tol) {
  const double a = cross(w.lo, r);
  const double b = cross(r, w.hi);
  const bool lo_ok = w.lo_closed ? (a >= -tol && dot(w.lo, r) > 0) : a > tol;
  const bool hi_ok = w.hi_closed ? (b >= -tol && dot(w.hi, r) > 0) : b > tol;
  return lo_ok && hi_ok;
}

inline bool sort_saddles(const SaddleConnection& a, const SaddleConnection& b) {
  if (std::abs(a.length - b.length) > 1e-12) return a.length < b.length;
  const double aa = angle_of(a.holonomy), ba = angle_of(b.holonomy);
  if (std::abs(aa - ba) > 1e-12) return aa < ba;
  return std::tie(a.start, a.end) < std::tie(b.start, b.end);
}

}  // namespace detail

inline SaddleSearch search_saddles(const ConeSurface& s, std::size_t base, double L,
                                   const SaddleSearchOptions& opts = {}) {
  const auto& base_cls = s.vertex_class(base);
  if (!base_cls.singular())
    throw Error(ErrorCode::InvalidArgument, "vertex class " + std::to_string(base) + " is not singular");
  if (!(L > 0)) throw Error(ErrorCode::InvalidArgument, "length bound must be positive");
  const Tolerances& tol = s.tolerances();
  constexpr std::size_t kNoEdge = static_cast<std::size_t>(-1);

  SaddleSearch out;
  struct Candidate {
    std::size_t root_corner;
    Vec2 r;
    Corner far;
  };
  std::vector<Candidate> found;

  struct Node {
    std::size_t chart;
    Isometry frame;
    std::size_t entry;
    detail::RayWindow w;
  };

  for (std::size_t k = 0; k < base_cls.corners.size(); ++k) {
    const Corner root = base_cls.corners[k];
    const auto& rp = s.chart(root.chart);
    const Vec2 P = rp.vertex(root.vertex);
    const Vec2 out_dir = normalized(rp.vertex(root.vertex + 1) - P);
    const double alpha = base_cls.corner_angles[k];

    // The corner's half-open range [outgoing edge, incoming edge) split into
    // pieces narrower than pi.
    const std::size_t pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(alpha / (kPi / 2))));
    std::vector<Node> stack;
    for (std::size_t j = 0; j < pieces; ++j) {
      detail::RayWindow w;
      w.lo = j == 0 ? out_dir : rotate(out_dir, alpha * j / pieces);
      w.hi = j + 1 == pieces ? normalized(rp.vertex(root.vertex + rp.size() - 1) - P)
                             : rotate(out_dir, alpha * (j + 1) / pieces);
      w.lo_closed = true;
      w.hi_closed = false;
      stack.push_back({root.chart, Isometry::identity(), kNoEdge, w});
    }

    while (!stack.empty()) {
      const Node node = stack.back();
      stack.pop_back();
      if (++out.charts_unfolded > opts.budget)
        throw Error(ErrorCode::UnfoldingBudgetExceeded,
                    "more than " + std::to_string(opts.budget) + " chart copies unfolded (L = " + std::to_string(L) + ")");
      const auto& poly = s.chart(node.chart);
      const std::size_t n = poly.size();
      std::vector<Vec2> dv(n);
      for (std::size_t i = 0; i < n; ++i) dv[i] = node.frame.apply(poly.vertex(i));
      const bool is_root = node.entry == kNoEdge;

      for (std::size_t i = 0; i < n; ++i) {
        if (!is_root && (i == node.entry || i == (node.entry + 1) % n)) continue;
        if (is_root && i == root.vertex) continue;
        const Vec2 r = dv[i] - P;
        const double dist = norm(r);
        if (dist > L + tol.len) continue;
        if (!detail::in_window(node.w, r / dist, tol.hit / dist)) continue;
        bool blocked = false;
        for (std::size_t e = 0; e < n && !blocked; ++e) {
          if (e == node.entry) continue;
          blocked = segments_cross(P, dv[i], dv[e], dv[(e + 1) % n], 1e-12);
        }
        if (blocked) continue;
        if (!s.vertex_class(s.class_of({node.chart, i})).singular()) continue;
        found.push_back({k, r, {node.chart, i}});
      }

      for (std::size_t e = 0; e < n; ++e) {
        if (e == node.entry) continue;
        const Vec2 A = dv[e], B = dv[(e + 1) % n];
        const Vec2 ra = A - P, rb = B - P;
        const double la = norm(ra), lb = norm(rb);
        if (la == 0.0 || lb == 0.0) continue;
        if (cross(ra, rb) <= tol.hit * std::max(la, lb)) continue;  // not facing away from P
        if (distance_point_segment(P, A, B) > L) continue;
        const Vec2 ua = ra / la, ub = rb / lb;
        detail::RayWindow cw;
        const double ca = cross(node.w.lo, ua);
        if (ca > tol.hit / la) {
          cw.lo = ua;
          cw.lo_closed = false;
        } else {
          cw.lo = node.w.lo;
          cw.lo_closed = node.w.lo_closed && ca < -tol.hit / la;
        }
        const double cb = cross(ub, node.w.hi);
        if (cb > tol.hit / lb) {
          cw.hi = ub;
          cw.hi_closed = false;
        } else {
          cw.hi = node.w.hi;
          cw.hi_closed = node.w.hi_closed && cb < -tol.hit / lb;
        }
        if (cross(cw.lo, cw.hi) <= 1e-15 || dot(cw.lo, cw.hi) < -1.0 + 1e-15) continue;
        const EdgeRef nb = s.partner({node.chart, e});
        stack.push_back({nb.chart, node.frame * s.crossing(nb), nb.edge, cw});
      }
    }
  }

  std::map<std::tuple<std::size_t, std::size_t, long long, long long, long long>, bool> seen;
  auto key = [](double x) { return static_cast<long long>(std::llround(x * 1e9)); };
  TraceOptions topts;
  topts.record_min_distance = false;
  for (const auto& c : found) {
    const Corner root = base_cls.corners[c.root_corner];
    const Vec2 P = s.chart(root.chart).vertex(root.vertex);
    const double len = norm(c.r);
    SaddleConnection sc;
    sc.start = base;
    sc.end = s.class_of(c.far);
    sc.length = len;
    sc.holonomy = c.r;
    sc.start_corner = root;
    sc.start_direction = c.r / len;
    sc.start_angle = s.cone_coordinate(root, sc.start_direction);
    sc.end_corner = c.far;
    const auto k = std::make_tuple(sc.start, sc.end, key(c.r.x), key(c.r.y), key(len));
    if (seen.count(k)) continue;
    seen[k] = true;
    if (opts.verify) {
      sc.path = trace(s, {root.chart, P, sc.start_direction}, len + 1e-6 * std::max(1.0, len), topts);
      const TraceEvent* ev = sc.path.last_event();
      const bool ok = ev && ev->kind == EventKind::ConeHit && *ev->vertex_class == sc.end &&
                      std::abs(sc.path.total_length - len) <= 1e-7 * std::max(1.0, len);
      if (!ok) {
        ++out.rejected;
        continue;
      }
      sc.end_corner = {ev->chart, *ev->vertex};
      sc.end_angle = s.cone_coordinate(sc.end_corner, -ev->incoming);
    } else {
      // Without a path only the far corner's chart is known; the ray back
      // along the connection in that chart is -(holonomy) transported, which
      // is unavailable here.
      sc.end_angle = 0.0;
    }
    out.connections.push_back(std::move(sc));
  }
  std::sort(out.connections.begin(), out.connections.end(), detail::sort_saddles);
  return out;
}

/// Primitive saddle connections from `base` of length at most L.
inline std::vector<SaddleConnection> enumerate_saddles(const ConeSurface& s, std::size_t base, double L,
                                                       const SaddleSearchOptions& opts = {}) {
  return search_saddles(s, base, L, opts).connections;
}

/// Saddle connections from every singular class, merged and sorted.
inline std::vector<SaddleConnection> enumerate_all_saddles(const ConeSurface& s, double L,
                                                           const SaddleSearchOptions& opts = {}) {
  std::vector<SaddleConnection> all;
  for (const std::size_t b : s.singular_classes()) {
    auto part = enumerate_saddles(s, b, L, opts);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  std::stable_sort(all.begin(), all.end(), detail::sort_saddles);
  return all;
}

struct DirectionSpectrum {
  struct Entry {
    double angle = 0.0;  // (-pi, pi]
    std::size_t multiplicity = 0;
  };
  std::vector<Entry> directions;  // sorted by angle
  double max_gap = kTwoPi;
};

/// Holonomy directions of all saddle connections of length <= L, in each
/// start chart's frame, with the largest angular gap on the circle.
inline DirectionSpectrum direction_spectrum(const ConeSurface& s, double L, const SaddleSearchOptions& opts = {}) {
  std::map<long long, std::pair<double, std::size_t>> bins;
  for (const auto& sc : enumerate_all_saddles(s, L, opts)) {
    const double a = angle_of(sc.holonomy);
    auto& b = bins[std::llround(a * 1e9)];
    b.first = a;
    ++b.second;
  }
  DirectionSpectrum sp;
  for (const auto& [k, v] : bins) sp.directions.push_back({v.first, v.second});
  if (sp.directions.empty()) return sp;
  double gap = sp.directions.front().angle + kTwoPi - sp.directions.back().angle;
  for (std::size_t i = 1; i < sp.directions.size(); ++i)
    gap = std::max(gap, sp.directions[i].angle - sp.directions[i - 1].angle);
  sp.max_gap = gap;
  return sp;
}

/// Appends `b`'s path to `a`'s at their shared cone point. The development
/// continues across the smaller of the two wedges between the arrival ray
/// and the departure ray (counterclockwise on a tie).
inline TraceResult join_paths(const ConeSurface& s, const TraceResult& a, Corner a_end, double a_end_angle,
                              const TraceResult& b, double b_start_angle) {
  TraceResult r = a;
  const std::size_t cls_id = s.class_of(a_end);
  const auto& cls = s.vertex_class(cls_id);
  const std::size_t m = cls.corners.size();
  const std::size_t k_in = s.position_in_class(a_end);
  const double ccw = wrap_angle(b_start_angle - a_end_angle, cls.angle);
  Isometry link = Isometry::identity();
  if (ccw <= cls.angle - ccw + 1e-12) {
    link = turn_at_vertex(s, cls_id, k_in, a_end_angle, b_start_angle).to_arrival;
  } else {
    // Clockwise: step back through corners until the remaining turn fits.
    std::size_t k = k_in;
    double local = wrap_angle(a_end_angle, cls.angle) - cls.offsets[k];
    double remaining = cls.angle - ccw;
    while (remaining > local + 1e-12) {
      remaining -= local;
      const std::size_t prev = (k + m - 1) % m;
      const Corner c = cls.corners[prev];
      const std::size_t n = s.chart(c.chart).size();
      link = link * s.crossing({c.chart, (c.vertex + n - 1) % n});
      k = prev;
      local = cls.corner_angles[k];
    }
  }
  const double offset = a.total_length;
  for (std::size_t k = 0; k < b.segments.size(); ++k) {
    TraceSegment seg = b.segments[k];
    if (k == 0) seg.to_previous = link * seg.to_previous;
    r.segments.push_back(seg);
  }
  for (auto ev : b.events) {
    ev.arclength += offset;
    r.events.push_back(ev);
  }
  for (auto [t, m2] : b.min_distance_series) r.min_distance_series.emplace_back(t + offset, m2);
  r.total_length = a.total_length + b.total_length;
  r.end = b.end;
  r.end.arclength += offset;
  return r;
}

/// A generalized saddle connection through the junction of `a` and `b`,
/// which must be a large or marked point where `b` leaves inside the
/// continuation sector of `a`.
inline SaddleConnection concatenate(const ConeSurface& s, const SaddleConnection& a, const SaddleConnection& b) {
  if (a.end != b.start)
    throw Error(ErrorCode::EndpointMismatch, "link ends at class " + std::to_string(a.end) + " but next starts at " +
                                                 std::to_string(b.start));
  const auto& cls = s.vertex_class(a.end);
  if (cls.kind == VertexKind::Small || cls.kind == VertexKind::Regular)
    throw Error(ErrorCode::DomainError, "a geodesic cannot pass through a " + std::string(to_string(cls.kind)) +
                                            " point");
  const ContinuationSector sec = continuation_sector(s, a.end, a.end_angle);
  const bool straight_marked =
      cls.kind == VertexKind::Marked &&
      std::abs(wrap_angle(b.start_angle - a.end_angle - kPi + 1e-9, cls.angle) - 1e-9) <= 1e-9;
  if (!sec.contains(b.start_angle, 1e-9) && !straight_marked)
    throw Error(ErrorCode::DomainError, "outgoing link leaves outside the continuation sector");
  SaddleConnection r;
  r.start = a.start;
  r.end = b.end;
  r.length = a.length + b.length;
  r.start_corner = a.start_corner;
  r.end_corner = b.end_corner;
  r.start_direction = a.start_direction;
  r.start_angle = a.start_angle;
  r.end_angle = b.end_angle;
  r.interior_hits = a.interior_hits;
  r.interior_hits.push_back(a.end);
  r.interior_hits.insert(r.interior_hits.end(), b.interior_hits.begin(), b.interior_hits.end());
  r.path = join_paths(s, a.path, a.end_corner, a.end_angle, b.path, b.start_angle);
  const DevelopedPath dp = develop(r.path);
  r.holonomy = dp.points.back() - dp.points.front();
  return r;
}

struct Junction {
  std::size_t vertex_class = 0;
  VertexKind kind = VertexKind::Small;
  double ccw_side = 0.0;  // angle swept counterclockwise from arrival ray to departure ray
  double cw_side = 0.0;
};

struct PiecewiseGeodesic {
  std::vector<SaddleConnection> links;
  std::vector<Junction> junctions;  // between consecutive links, plus the closing one
  bool closed = false;
  bool single_link = false;  // closed with one link
  double total_length = 0.0;
};

inline PiecewiseGeodesic chain(const ConeSurface& s, const std::vector<SaddleConnection>& links) {
  if (links.empty()) throw Error(ErrorCode::InvalidArgument, "empty chain");
  PiecewiseGeodesic pg;
  pg.links = links;
  auto junction = [&](const SaddleConnection& a, const SaddleConnection& b) {
    const auto& cls = s.vertex_class(a.end);
    Junction j;
    j.vertex_class = a.end;
    j.kind = cls.kind;
    j.ccw_side = wrap_angle(b.start_angle - a.end_angle, cls.angle);
    j.cw_side = cls.angle - j.ccw_side;
    return j;
  };
  for (std::size_t i = 0; i < links.size(); ++i) {
    pg.total_length += links[i].length;
    if (i + 1 < links.size()) {
      if (links[i].end != links[i + 1].start)
        throw Error(ErrorCode::EndpointMismatch, "link " + std::to_string(i) + " ends at class " +
                                                     std::to_string(links[i].end) + " but link " +
                                                     std::to_string(i + 1) + " starts at class " +
                                                     std::to_string(links[i + 1].start));
      pg.junctions.push_back(junction(links[i], links[i + 1]));
    }
  }
  pg.closed = links.back().end == links.front().start;
  pg.single_link = pg.closed && links.size() == 1;
  if (pg.closed) pg.junctions.push_back(junction(links.back(), links.front()));
  return pg;
}

/// The chain as one path (links joined at their cone points), repeated
/// `repeats` times when closed.
inline TraceResult chain_path(const ConeSurface& s, const PiecewiseGeodesic& pg, std::size_t repeats = 1) {
  if (!pg.closed) repeats = 1;
  TraceResult r = pg.links.front().path;
  const SaddleConnection* prev = &pg.links.front();
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    for (std::size_t i = rep == 0 ? 1 : 0; i < pg.links.size(); ++i) {
      const auto& next = pg.links[i];
      r = join_paths(s, r, prev->end_corner, prev->end_angle, next.path, next.start_angle);
      prev = &next;
    }
  }
  return r;
}

}  // namespace conesurf
