// Closed geodesics, the widths of the flat strips around them, and the
// closed-geodesic approximation experiment.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "conesurf/error.hpp"
#include "conesurf/saddles.hpp"
#include "conesurf/surface.hpp"
#include "conesurf/tracer.hpp"

namespace conesurf {

/// Right-angled quadrangle inside the intersection of two flat strips of
/// widths eps <= delta crossing at angle 2*theta.
struct Quadrangle {
  double width = 0.0;
  double length = 0.0;
  double theta = 0.0;
  double eps = 0.0;
  double delta = 0.0;
};

inline Quadrangle strip_quadrangle(double eps, double delta, double theta) {
  if (!(eps > 0) || !(eps <= delta) || !std::isfinite(delta))
    throw Error(ErrorCode::DomainError, "need 0 < eps <= delta, got eps=" + std::to_string(eps) +
                                            " delta=" + std::to_string(delta));
  if (!(theta > 0) || !(theta < kPi / 2))
    throw Error(ErrorCode::DomainError, "theta must lie in (0, pi/2), got " + std::to_string(theta));
  return {delta + eps / (2 * std::cos(theta)), eps / (2 * std::sin(theta)), theta, eps, delta};
}

/// A singular point on the boundary of a strip: `t` is the core parameter of
/// its foot, `h` its distance from the core.
struct BoundaryPoint {
  std::size_t vertex_class = 0;
  double t = 0.0;
  double h = 0.0;
};

struct StripSide {
  std::optional<double> width;  // nullopt: unbounded (no singular point within the cap)
  std::vector<BoundaryPoint> boundary;
};

struct StripWidth {
  StripSide left;   // to the left of the core's direction of travel
  StripSide right;
  std::size_t charts_unfolded = 0;
};

struct StripOptions {
  double cap_factor = 1000.0;  // width cap = cap_factor * max chart diameter
  std::size_t budget = 1'000'000;
};

namespace detail {

// Sweeps the half-strip on one side of a closed core. Each node is a chart
// copy in the plane of the core's first chart, together with the interval of
// core parameters whose perpendicular rays reach it.
inline StripSide sweep_strip_side(const ConeSurface& s, const TraceResult& core, double sign, double cap,
                                  std::size_t budget, std::size_t& unfolded) {
  constexpr std::size_t kNoEdge = static_cast<std::size_t>(-1);
  const Tolerances& tol = s.tolerances();
  const DevelopedPath dp = develop(core);
  const Vec2 p0 = dp.points.front();
  const Vec2 d = normalized(core.start.direction);
  const Vec2 n = perp(d) * sign;

  struct Node {
    std::size_t chart;
    Isometry frame;
    std::size_t entry;
    double lo, hi;
  };
  std::vector<Node> stack;
  for (std::size_t k = 0; k < core.segments.size(); ++k)
    stack.push_back({core.segments[k].chart, dp.frames[k], kNoEdge, dp.arclengths[k], dp.arclengths[k + 1]});

  double best = std::numeric_limits<double>::infinity();
  std::vector<BoundaryPoint> boundary;
  const double C = core.total_length;
  while (!stack.empty()) {
    const Node node = stack.back();
    stack.pop_back();
    if (++unfolded > budget)
      throw Error(ErrorCode::UnfoldingBudgetExceeded, "strip sweep exceeded " + std::to_string(budget) + " charts");
    const auto& poly = s.chart(node.chart);
    const std::size_t m = poly.size();
    std::vector<Vec2> dv(m);
    std::vector<double> tv(m), hv(m);
    for (std::size_t i = 0; i < m; ++i) {
      dv[i] = node.frame.apply(poly.vertex(i));
      tv[i] = dot(dv[i] - p0, d);
      hv[i] = dot(dv[i] - p0, n);
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (node.entry != kNoEdge && (i == node.entry || i == (node.entry + 1) % m)) continue;
      if (hv[i] <= tol.len || tv[i] < node.lo - tol.len || tv[i] > node.hi + tol.len) continue;
      const std::size_t cls = s.class_of({node.chart, i});
      if (!s.vertex_class(cls).singular()) continue;
      const double t = wrap_angle(tv[i], C);  // core parameter modulo the period
      if (hv[i] < best - tol.len) {
        best = hv[i];
        boundary.clear();
      }
      if (std::abs(hv[i] - best) <= tol.len) {
        const bool dup = std::any_of(boundary.begin(), boundary.end(), [&](const BoundaryPoint& b) {
          return b.vertex_class == cls && std::abs(wrap_angle(b.t - t + 1e-9, C) - 1e-9) <= 1e-9;
        });
        if (!dup) boundary.push_back({cls, t, hv[i]});
      }
    }
    for (std::size_t e = 0; e < m; ++e) {
      if (e == node.entry) continue;
      const std::size_t f = (e + 1) % m;
      const Vec2 edge = dv[f] - dv[e];
      const Vec2 outward{edge.y, -edge.x};
      if (dot(outward, n) <= 1e-12 * norm(edge)) continue;
      if (std::abs(tv[f] - tv[e]) <= 1e-15) continue;
      // Portion of the edge over the window, clipped to h >= 0.
      const double ta = std::min(tv[e], tv[f]), tb = std::max(tv[e], tv[f]);
      double lo = std::max(ta, node.lo), hi = std::min(tb, node.hi);
      auto h_at = [&](double t) { return hv[e] + (hv[f] - hv[e]) * (t - tv[e]) / (tv[f] - tv[e]); };
      if (hv[e] < 0 || hv[f] < 0) {
        if (hv[e] < 0 && hv[f] < 0) continue;
        const double t0 = tv[e] + (tv[f] - tv[e]) * (-hv[e]) / (hv[f] - hv[e]);
        const double t_pos = hv[e] >= 0 ? tv[e] : tv[f];
        if (t_pos > t0) lo = std::max(lo, t0);
        else hi = std::min(hi, t0);
      }
      if (hi - lo <= 1e-12) continue;
      const double hmin = std::min(h_at(lo), h_at(hi));
      if (hmin >= std::min(best, cap)) continue;
      const EdgeRef nb = s.partner({node.chart, e});
      stack.push_back({nb.chart, node.frame * s.crossing(nb), nb.edge, lo, hi});
    }
  }
  StripSide side;
  if (best <= cap) {
    side.width = best;
    std::sort(boundary.begin(), boundary.end(),
              [](const BoundaryPoint& a, const BoundaryPoint& b) { return std::tie(a.t, a.vertex_class) < std::tie(b.t, b.vertex_class); });
    side.boundary = std::move(boundary);
  }
  return side;
}

}  // namespace detail

/// One-sided widths of the maximal flat strip around a closed geodesic.
inline StripWidth strip_width(const ConeSurface& s, const TraceResult& core, const StripOptions& opts = {}) {
  if (!core.closed() || core.segments.empty())
    throw Error(ErrorCode::NotClosed, "core is not a verified closed geodesic");
  const double cap = opts.cap_factor * s.max_chart_diameter();
  StripWidth w;
  w.left = detail::sweep_strip_side(s, core, 1.0, cap, opts.budget, w.charts_unfolded);
  w.right = detail::sweep_strip_side(s, core, -1.0, cap, opts.budget, w.charts_unfolded);
  return w;
}

/// The state at signed distance u to the left of `at` (right if u < 0),
/// reached by the perpendicular geodesic, with the direction carried along.
inline GeodesicState offset_state(const ConeSurface& s, const GeodesicState& at, double u) {
  const Vec2 d = normalized(at.direction);
  if (u == 0.0) return {at.chart, at.point, d, 0.0};
  const Vec2 n = u > 0 ? perp(d) : -perp(d);
  TraceOptions o;
  o.record_min_distance = false;
  const TraceResult tr = trace(s, {at.chart, at.point, n, 0.0}, std::abs(u), o);
  if (tr.hit_cone())
    throw Error(ErrorCode::DomainError, "offset " + std::to_string(u) + " reaches a cone point");
  const double back = u > 0 ? -kPi / 2 : kPi / 2;
  return {tr.end.chart, tr.end.point, rotate(tr.end.direction, back), 0.0};
}

struct Cylinder {
  TraceResult core;
  double circumference = 0.0;
  std::optional<double> width_left;
  std::optional<double> width_right;
  std::vector<BoundaryPoint> left_boundary;
  std::vector<BoundaryPoint> right_boundary;
};

struct ClosedSearchOptions {
  double max_length = 100.0;
  std::optional<Vec2> hint;  // start point tried first, in the search chart
  bool recentre = true;      // move the core to the middle of its strip
  StripOptions strip;
};

namespace detail {

inline std::optional<TraceResult> closed_core(const ConeSurface& s, const GeodesicState& st, double max_length) {
  TraceOptions o;
  o.detect_recurrence = true;
  o.record_min_distance = false;
  const TraceResult tr = trace(s, st, max_length, o);
  if (tr.closed() && tr.last_event()->residual < s.tolerances().rec) return tr;
  return std::nullopt;
}

inline Cylinder make_cylinder(const ConeSurface& s, TraceResult core, const ClosedSearchOptions& opts) {
  StripWidth w = strip_width(s, core, opts.strip);
  if (opts.recentre && w.left.width && w.right.width) {
    const double shift = 0.5 * (*w.left.width - *w.right.width);
    if (std::abs(shift) > s.tolerances().len) {
      const GeodesicState mid = offset_state(s, core.start, shift);
      if (auto c = closed_core(s, mid, core.total_length * 1.5 + 1e-6)) {
        core = std::move(*c);
        w = strip_width(s, core, opts.strip);
      }
    }
  }
  Cylinder cyl;
  cyl.circumference = core.total_length;
  cyl.core = std::move(core);
  cyl.width_left = w.left.width;
  cyl.width_right = w.right.width;
  cyl.left_boundary = std::move(w.left.boundary);
  cyl.right_boundary = std::move(w.right.boundary);
  return cyl;
}

}  // namespace detail

/// Searches for a closed geodesic in `direction` (chart coordinates of
/// `chart`) by tracing from the hint, the chart centroid, then points between
/// the centroid and each vertex and edge midpoint. Returns nullopt when none
/// of the attempts closes within max_length, which does not prove absence.
inline std::optional<Cylinder> find_closed_geodesic(const ConeSurface& s, std::size_t chart, Vec2 direction,
                                                    const ClosedSearchOptions& opts = {}) {
  if (chart >= s.charts().size())
    throw Error(ErrorCode::StartOutsideSurface, "chart index " + std::to_string(chart) + " out of range");
  if (norm(direction) < 1e-300) throw Error(ErrorCode::ZeroDirection, "direction must be non-zero");
  const auto& poly = s.chart(chart);
  const Vec2 c = polygon_centroid(poly.vertices);
  std::vector<Vec2> starts;
  if (opts.hint) starts.push_back(*opts.hint);
  starts.push_back(c);
  for (const double f : {0.5, 0.25, 0.75}) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
      starts.push_back(c + (poly.vertex(i) - c) * f);
      starts.push_back(c + ((poly.vertex(i) + poly.vertex(i + 1)) * 0.5 - c) * f);
    }
  }
  for (const Vec2 p : starts) {
    if (!point_in_polygon(p, poly.vertices)) continue;
    if (auto core = detail::closed_core(s, {chart, p, direction, 0.0}, opts.max_length))
      return detail::make_cylinder(s, std::move(*core), opts);
  }
  return std::nullopt;
}

/// The cylinder parallel to a saddle connection, searched in its start chart.
inline std::optional<Cylinder> find_closed_geodesic(const ConeSurface& s, const SaddleConnection& sc,
                                                    ClosedSearchOptions opts = {}) {
  if (!opts.hint) {
    // Just beside the connection's midpoint, on its left.
    const Vec2 P = s.chart(sc.start_corner.chart).vertex(sc.start_corner.vertex);
    const Vec2 q = P + sc.start_direction * std::min(0.5 * sc.length, 1e-3) + perp(sc.start_direction) * 1e-3;
    if (point_in_polygon(q, s.chart(sc.start_corner.chart).vertices)) opts.hint = q;
  }
  return find_closed_geodesic(s, sc.start_corner.chart, sc.start_direction, opts);
}

// ---------------------------------------------------------------------------
// Density experiment

struct DensityOptions {
  double window = 5.0;  // W
  double eta = 0.05;
  double step = 1e-3;   // quadrature step
  /// Closed chains of saddle connections as extra candidates. By default they
  /// are used only on surfaces with small cone points, where closed
  /// geodesics cannot pass through the singular set.
  std::optional<bool> chains;
  std::size_t saddle_budget = 1'000'000;
};

struct DensityCandidate {
  std::string kind;  // "closed_geodesic" or "chain"
  Vec2 direction{};  // anchor-chart direction (closed geodesics)
  double circumference = 0.0;
  std::size_t links = 0;
  double distance = std::numeric_limits<double>::infinity();
};

struct DensityStep {
  double L = 0.0;
  double distance = std::numeric_limits<double>::infinity();
  std::optional<DensityCandidate> best;
  std::size_t candidates = 0;
};

struct DensityReport {
  std::vector<DensityStep> steps;
  bool target_closed = false;
  bool non_increasing = true;
  bool strictly_decreasing = true;
  double final_value = std::numeric_limits<double>::infinity();
  double truncation_bound = 0.0;
  bool pass = false;
};

namespace detail {

// Isometries taking each chart into the frame of `anchor`, along a
// breadth-first spanning tree of the gluing graph.
inline std::vector<Isometry> frames_into(const ConeSurface& s, std::size_t anchor) {
  std::vector<std::optional<Isometry>> f(s.charts().size());
  f[anchor] = Isometry::identity();
  std::queue<std::size_t> q;
  q.push(anchor);
  while (!q.empty()) {
    const std::size_t c = q.front();
    q.pop();
    for (std::size_t e = 0; e < s.chart(c).size(); ++e) {
      const EdgeRef nb = s.partner({c, e});
      if (f[nb.chart]) continue;
      f[nb.chart] = *f[c] * s.crossing(nb);
      q.push(nb.chart);
    }
  }
  std::vector<Isometry> out;
  for (const auto& x : f) out.push_back(x.value_or(Isometry::identity()));
  return out;
}

// Arclength on `path` in [lo, hi] of the point in chart `chart` nearest `p`.
inline std::optional<double> nearest_anchor(const TraceResult& path, std::size_t chart, Vec2 p, double lo, double hi) {
  double acc = 0.0, best = std::numeric_limits<double>::infinity();
  std::optional<double> at;
  for (const auto& seg : path.segments) {
    const double len = seg.length();
    if (seg.chart == chart && acc + len >= lo && acc <= hi && len > 0) {
      const double f = closest_parameter(p, seg.start, seg.end);
      const double dist = norm(seg.start + (seg.end - seg.start) * f - p);
      const double a = std::clamp(acc + f * len, lo, hi);
      if (dist < best) {
        best = dist;
        at = a;
      }
    }
    acc += len;
  }
  return at;
}

}  // namespace detail

/// For each length bound L_i, the smallest compact-open distance from the
/// target (the geodesic through `target` traced both ways) to a closed
/// geodesic or closed saddle chain of length <= L_i.
inline DensityReport density_experiment(const ConeSurface& s, const GeodesicState& target,
                                        const std::vector<double>& lengths, const DensityOptions& opts = {}) {
  if (lengths.empty()) throw Error(ErrorCode::InvalidArgument, "no lengths given");
  for (std::size_t i = 0; i < lengths.size(); ++i)
    if (!(lengths[i] > 0) || (i > 0 && lengths[i] <= lengths[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "lengths must be positive and strictly increasing");
  if (!(opts.window > 0) || !(opts.eta > 0)) throw Error(ErrorCode::InvalidArgument, "window and eta must be positive");
  const double W = opts.window;
  const double Lmax = lengths.back();

  TraceOptions free_opts;
  free_opts.stop_on_cone = false;
  free_opts.record_min_distance = false;
  const WindowTrace tw = trace_window(s, target, W, free_opts);
  if (tw.trace.total_length < tw.anchor + W - 1e-9 || tw.anchor < W - 1e-9)
    throw Error(ErrorCode::DomainError, "target geodesic stops at a cone point within the window");
  const TraceSegment& anchor_seg = tw.trace.segments[segment_at(tw.trace, tw.anchor)];
  const std::size_t anchor_chart = anchor_seg.chart;
  const Vec2 anchor_point = developed_position(tw.trace, develop(tw.trace, tw.anchor), tw.anchor);
  const Vec2 target_dir = normalized(anchor_seg.end - anchor_seg.start);

  DensityReport rep;
  {
    TraceOptions ro = free_opts;
    ro.detect_recurrence = true;
    rep.target_closed = trace(s, {anchor_chart, anchor_point, target_dir, 0.0}, Lmax, ro).closed();
  }

  SaddleSearchOptions so;
  so.budget = opts.saddle_budget;
  const auto saddles = enumerate_all_saddles(s, Lmax, so);
  const auto frames = detail::frames_into(s, anchor_chart);

  std::vector<DensityCandidate> cands;
  auto distance_to = [&](const TraceResult& tr, double anchor) {
    try {
      return geodesic_distance(s, tw.trace, tw.anchor, tr, anchor, W, opts.step).value;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  // Closed geodesics through the target's anchor point, one per direction
  // and circumference.
  std::map<std::tuple<long long, long long>, bool> dirs;
  for (const auto& sc : saddles) {
    const Vec2 v = normalized(frames[sc.start_corner.chart].apply_dir(sc.start_direction));
    for (const Vec2 dir : {v, -v}) {
      const auto key = std::make_tuple(std::llround(dir.x * 1e9), std::llround(dir.y * 1e9));
      if (dirs.count(key)) continue;
      dirs[key] = true;
      TraceOptions ro = free_opts;
      ro.detect_recurrence = true;
      const TraceResult loop = trace(s, {anchor_chart, anchor_point, dir, 0.0}, Lmax + 1e-9, ro);
      if (!loop.closed()) continue;
      DensityCandidate c;
      c.kind = "closed_geodesic";
      c.direction = dir;
      c.circumference = loop.total_length;
      const WindowTrace cw = trace_window(s, {anchor_chart, anchor_point, dir, 0.0}, W, free_opts);
      c.distance = distance_to(cw.trace, cw.anchor);
      cands.push_back(c);
    }
  }

  bool has_small = false;
  for (const auto& c : s.vertex_classes()) has_small |= c.kind == VertexKind::Small;
  if (opts.chains.value_or(has_small)) {
    auto add_chain = [&](const std::vector<SaddleConnection>& links) {
      const PiecewiseGeodesic pg = chain(s, links);
      const double len = pg.total_length;
      const std::size_t repeats = static_cast<std::size_t>(std::ceil(2 * W / len)) + 2;
      const TraceResult path = chain_path(s, pg, repeats);
      const std::size_t r0 = repeats / 2;
      const auto a = detail::nearest_anchor(path, anchor_chart, anchor_point, r0 * len, (r0 + 1) * len);
      if (!a) return;
      DensityCandidate c;
      c.kind = "chain";
      c.circumference = len;
      c.links = links.size();
      c.distance = distance_to(path, *a);
      cands.push_back(c);
    };
    for (const auto& a : saddles)
      if (a.start == a.end) add_chain({a});
    for (const auto& a : saddles)
      for (const auto& b : saddles)
        if (a.end == b.start && b.end == a.start && a.length + b.length <= Lmax + 1e-9) add_chain({a, b});
  }

  std::sort(cands.begin(), cands.end(), [](const DensityCandidate& a, const DensityCandidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.circumference < b.circumference;
  });
  for (const double L : lengths) {
    DensityStep st;
    st.L = L;
    for (const auto& c : cands) {
      if (c.circumference > L + 1e-9) continue;
      ++st.candidates;
      if (!st.best) {
        st.best = c;
        st.distance = c.distance;
      }
    }
    rep.steps.push_back(st);
  }
  for (std::size_t i = 1; i < rep.steps.size(); ++i) {
    if (rep.steps[i].distance > rep.steps[i - 1].distance) rep.non_increasing = false;
    if (!(rep.steps[i].distance < rep.steps[i - 1].distance)) rep.strictly_decreasing = false;
  }
  rep.final_value = rep.steps.back().distance;
  rep.truncation_bound = 2.0 * s.total_chart_diameter() * std::exp(-W);
  rep.pass = rep.non_increasing && rep.final_value < opts.eta;
  return rep;
}

}  // namespace conesurf
