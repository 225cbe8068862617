// Straight-line geodesic flow on a cone surface. A trajectory is a chain of
// chart-local segments; crossing an edge re-expresses the state in the
// partner chart through the gluing isometry, and every segment remembers the
// isometry back to its predecessor so the whole path can be developed into a
// single plane.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "conesurf/error.hpp"
#include "conesurf/geometry.hpp"
#include "conesurf/surface.hpp"

namespace conesurf {

struct GeodesicState {
  std::size_t chart = 0;
  Vec2 point{};
  Vec2 direction{1.0, 0.0};
  double arclength = 0.0;
};

enum class EventKind { EdgeCross, ConeHit, MaxLengthReached, SelfRecurrence };

constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::EdgeCross: return "EdgeCross";
    case EventKind::ConeHit: return "ConeHit";
    case EventKind::MaxLengthReached: return "MaxLengthReached";
    case EventKind::SelfRecurrence: return "SelfRecurrence";
  }
  return "?";
}

/// Outgoing directions at a cone point that continue an incoming geodesic.
/// Angles are cone angular coordinates of the vertex class; the sector is
/// [lower, lower + width] taken modulo the cone angle.
struct ContinuationSector {
  std::size_t vertex_class = 0;
  double cone_angle = 0.0;
  double incoming_angle = 0.0;  // coordinate of the ray pointing back along the incoming path
  double lower = 0.0;
  double width = 0.0;

  bool empty() const { return width <= 0.0; }
  double center() const { return wrap_angle(lower + 0.5 * width, cone_angle); }

  bool contains(double psi, double tol = 1e-12) const {
    if (empty()) return false;
    return wrap_angle(psi - lower + tol, cone_angle) <= width + 2 * tol;
  }
};

/// Sector for a cone of angle `cone_angle`; it has width max(0, angle - 2pi)
/// and is centered opposite the incoming ray.
inline ContinuationSector continuation_sector(double cone_angle, double incoming_angle) {
  ContinuationSector sec;
  sec.cone_angle = cone_angle;
  sec.incoming_angle = wrap_angle(incoming_angle, cone_angle);
  sec.width = std::max(0.0, cone_angle - kTwoPi);
  sec.lower = wrap_angle(sec.incoming_angle + kPi, cone_angle);
  return sec;
}

inline ContinuationSector continuation_sector(const ConeSurface& s, std::size_t class_id, double incoming_angle) {
  ContinuationSector sec = continuation_sector(s.vertex_class(class_id).angle, incoming_angle);
  sec.vertex_class = class_id;
  return sec;
}

/// Sector for a geodesic arriving at corner `arrival` with chart direction
/// `incoming` (pointing towards the vertex).
inline ContinuationSector continuation_sector(const ConeSurface& s, Corner arrival, Vec2 incoming) {
  return continuation_sector(s, s.class_of(arrival), s.cone_coordinate(arrival, -normalized(incoming)));
}

struct TraceEvent {
  EventKind kind = EventKind::EdgeCross;
  double arclength = 0.0;
  std::size_t chart = 0;  // chart the trajectory is in when the event occurs
  Vec2 point{};
  std::optional<EdgeRef> edge;               // EdgeCross through an edge
  std::optional<std::size_t> gluing;
  std::optional<std::size_t> vertex_class;   // ConeHit, or passage through a regular vertex
  std::optional<std::size_t> vertex;         // vertex index in `chart`
  Vec2 incoming{};
  std::optional<ContinuationSector> sector;  // ConeHit
  double residual = 0.0;                     // SelfRecurrence match distance
};

struct TraceSegment {
  std::size_t chart = 0;
  Vec2 start{};
  Vec2 end{};
  Isometry to_previous{};  // this chart's coordinates -> previous segment's chart

  double length() const { return norm(end - start); }
};

struct TraceResult {
  GeodesicState start{};
  GeodesicState end{};
  std::vector<TraceSegment> segments;
  std::vector<TraceEvent> events;
  double total_length = 0.0;
  /// (arclength T, m(T)) with m(T) the distance from the path up to T to the
  /// singular set. Non-increasing in T.
  std::vector<std::pair<double, double>> min_distance_series;

  const TraceEvent* last_event() const { return events.empty() ? nullptr : &events.back(); }
  bool closed() const { return last_event() && last_event()->kind == EventKind::SelfRecurrence; }
  bool hit_cone() const { return last_event() && last_event()->kind == EventKind::ConeHit; }
  double final_min_distance() const {
    return min_distance_series.empty() ? std::numeric_limits<double>::infinity() : min_distance_series.back().second;
  }
};

struct TraceOptions {
  bool stop_on_cone = true;
  bool detect_recurrence = false;
  bool record_min_distance = true;
  double sample_step = 0.01;  // m(T) sampling interval; <= 0 samples only at events
  std::vector<double> extra_samples;
  std::size_t max_steps = 100'000'000;
};

namespace detail {

// Singular points near a chart, in that chart's coordinates: its own singular
// corners plus those of each edge-neighbour unfolded across the shared edge.
struct SingularCandidate {
  Vec2 point;
  std::optional<std::size_t> gate;  // edge the straight path must cross
};

inline std::vector<std::vector<SingularCandidate>> singular_candidates(const ConeSurface& s) {
  std::vector<std::vector<SingularCandidate>> out(s.charts().size());
  for (std::size_t c = 0; c < s.charts().size(); ++c) {
    const auto& p = s.chart(c);
    for (std::size_t i = 0; i < p.size(); ++i)
      if (s.vertex_class(s.class_of({c, i})).singular()) out[c].push_back({p.vertex(i), std::nullopt});
    for (std::size_t e = 0; e < p.size(); ++e) {
      const EdgeRef nb = s.partner({c, e});
      const Isometry to_here = s.crossing(nb);
      const auto& q = s.chart(nb.chart);
      for (std::size_t i = 0; i < q.size(); ++i) {
        // The two corners on the shared edge are already the chart's own.
        if (i == nb.edge || i == (nb.edge + 1) % q.size()) continue;
        if (s.vertex_class(s.class_of({nb.chart, i})).singular()) out[c].push_back({to_here.apply(q.vertex(i)), e});
      }
    }
  }
  return out;
}

inline double candidate_distance(const PolygonChart& chart, const SingularCandidate& cand, Vec2 a, Vec2 b,
                                 double tol) {
  const double t = closest_parameter(cand.point, a, b);
  const Vec2 q = a + (b - a) * t;
  const double d = norm(cand.point - q);
  if (d == 0.0) return 0.0;
  for (std::size_t e = 0; e < chart.size(); ++e) {
    if (cand.gate && *cand.gate == e) continue;
    if (segments_cross(q, cand.point, chart.edge_start(e), chart.edge_end(e), tol))
      return std::numeric_limits<double>::infinity();
  }
  if (cand.gate) {
    const Vec2 ga = chart.edge_start(*cand.gate), gb = chart.edge_end(*cand.gate);
    if (!segments_touch(q, cand.point, ga, gb, tol)) return std::numeric_limits<double>::infinity();
  }
  return d;
}

struct StepHit {
  double t = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> edge;
  double edge_param = 0.0;
  std::optional<std::size_t> vertex;
};

// First boundary event along p + t d inside chart `poly`.
inline StepHit next_hit(const PolygonChart& poly, Vec2 p, Vec2 d, std::optional<std::size_t> skip_vertex,
                        const Tolerances& tol) {
  StepHit h;
  const std::size_t n = poly.size();
  double best_any = std::numeric_limits<double>::infinity();
  std::size_t best_any_edge = n;
  double best_any_param = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    const Vec2 a = poly.edge_start(e), b = poly.edge_end(e);
    const double denom = cross(d, b - a);
    if (denom <= 0.0) continue;  // not leaving through this edge
    const double t = cross(a - p, b - a) / denom;
    const double u = cross(a - p, d) / denom;
    if (t < best_any) {
      best_any = t;
      best_any_edge = e;
      best_any_param = u;
    }
    if (u < -1e-9 || u > 1.0 + 1e-9 || t < -tol.len) continue;
    if (t < h.t) {
      h.t = t;
      h.edge = e;
      h.edge_param = u;
    }
  }
  if (!h.edge && best_any_edge < n) {
    h.t = best_any;
    h.edge = best_any_edge;
    h.edge_param = best_any_param;
  }
  h.t = std::max(h.t, 0.0);
  h.edge_param = std::clamp(h.edge_param, 0.0, 1.0);

  double best_v = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (skip_vertex && *skip_vertex == i) continue;
    const Vec2 r = poly.vertex(i) - p;
    const double t = dot(r, d);
    if (t <= tol.hit) continue;
    if (std::abs(cross(d, r)) > tol.hit) continue;
    if (t > h.t + tol.hit) continue;
    if (t < best_v) {
      best_v = t;
      h.vertex = i;
    }
  }
  if (h.vertex) {
    h.t = best_v;
    h.edge.reset();
  }
  return h;
}

// Number of counterclockwise corner steps needed to rotate by `amount` from
// cone coordinate psi_from in class `cls`.
inline std::size_t ccw_steps(const VertexClass& cls, std::size_t k_from, double psi_from, double amount) {
  double local = psi_from - cls.offsets[k_from];
  std::size_t k = k_from;
  std::size_t steps = 0;
  double remaining = amount;
  while (remaining > cls.corner_angles[k] - local) {
    remaining -= cls.corner_angles[k] - local;
    k = (k + 1) % cls.corners.size();
    local = 0.0;
    ++steps;
  }
  return steps;
}

inline Isometry corner_walk_steps(const ConeSurface& s, std::size_t class_id, std::size_t from, std::size_t steps) {
  const auto& cls = s.vertex_class(class_id);
  Isometry acc = Isometry::identity();
  std::size_t k = from;
  for (std::size_t i = 0; i < steps; ++i) {
    const std::size_t next = (k + 1) % cls.corners.size();
    const Corner c = cls.corners[next];
    acc = acc * s.crossing({c.chart, c.vertex});
    k = next;
  }
  return acc;
}

}  // namespace detail

/// Where a ray leaving a vertex class at cone coordinate `psi_out` continues,
/// after arriving at coordinate `psi_in` in corner position `k_in`: the new
/// corner position, its chart direction, and the isometry from the new chart
/// into the arrival chart.
struct VertexTurn {
  std::size_t corner = 0;
  Vec2 direction{};
  Isometry to_arrival{};
};

inline VertexTurn turn_at_vertex(const ConeSurface& s, std::size_t class_id, std::size_t k_in, double psi_in,
                                 double psi_out) {
  const auto& cls = s.vertex_class(class_id);
  const double amount = wrap_angle(psi_out - psi_in, cls.angle);
  const auto [k_out, dir] = s.direction_at(class_id, psi_out);
  std::size_t steps = detail::ccw_steps(cls, k_in, psi_in, amount);
  // Guard against rounding placing the walk one corner off.
  const std::size_t m = cls.corners.size();
  if ((k_in + steps) % m != k_out) steps = (k_out + m - k_in) % m;
  return {k_out, dir, detail::corner_walk_steps(s, class_id, k_in, steps)};
}

inline TraceResult trace(const ConeSurface& s, GeodesicState start, double max_length,
                         const TraceOptions& opts = {}) {
  const Tolerances& tol = s.tolerances();
  if (start.chart >= s.charts().size())
    throw Error(ErrorCode::StartOutsideSurface, "chart index " + std::to_string(start.chart) + " out of range");
  if (!is_finite(start.direction) || norm(start.direction) < 1e-300)
    throw Error(ErrorCode::ZeroDirection, "start direction must be a non-zero finite vector");
  if (!is_finite(start.point))
    throw Error(ErrorCode::StartOutsideSurface, "start point is not finite");
  if (!(max_length > 0)) throw Error(ErrorCode::InvalidArgument, "max_length must be positive");
  start.direction = normalized(start.direction);

  TraceResult r;
  std::size_t chart = start.chart;
  Vec2 p = start.point;
  Vec2 d = start.direction;
  std::optional<std::size_t> skip_vertex;

  {
    const auto& poly = s.chart(chart);
    double boundary = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < poly.size(); ++e)
      boundary = std::min(boundary, distance_point_segment(p, poly.edge_start(e), poly.edge_end(e)));
    if (boundary > tol.len && !point_in_polygon(p, poly.vertices))
      throw Error(ErrorCode::StartOutsideSurface, "start point is outside polygon '" + poly.id + "'");
    for (std::size_t i = 0; i < poly.size(); ++i) {
      if (norm(poly.vertex(i) - p) <= tol.hit) {
        // Starting at a cone point: read the direction in the vertex's cone
        // coordinate, extending the chart frame counterclockwise if needed.
        const Corner c{chart, i};
        const auto& cls = s.vertex_class(s.class_of(c));
        const std::size_t k = s.position_in_class(c);
        const double local = ccw_angle(poly.vertex(i + 1) - poly.vertex(i), d);
        const auto [k_out, dir] = s.direction_at(cls.id, cls.offsets[k] + local);
        chart = cls.corners[k_out].chart;
        skip_vertex = cls.corners[k_out].vertex;
        p = s.chart(chart).vertex(*skip_vertex);
        d = dir;
        break;
      }
    }
    if (!skip_vertex) {
      const auto& cp = s.chart(chart);
      for (std::size_t e = 0; e < cp.size(); ++e) {
        const Vec2 a = cp.edge_start(e), b = cp.edge_end(e);
        if (distance_point_segment(p, a, b) <= tol.len && cross(b - a, d) < 0) {
          // On an edge and pointing out of the chart: start in the neighbour.
          const EdgeRef nb = s.partner({chart, e});
          const auto& q = s.chart(nb.chart);
          const double u = closest_parameter(p, a, b);
          p = q.edge_end(nb.edge) + (q.edge_start(nb.edge) - q.edge_end(nb.edge)) * u;
          d = s.crossing({chart, e}).apply_dir(d);
          chart = nb.chart;
          break;
        }
      }
    }
  }
  r.start = {chart, p, d, 0.0};

  const auto candidates = opts.record_min_distance ? detail::singular_candidates(s)
                                                   : std::vector<std::vector<detail::SingularCandidate>>{};
  double running_min = std::numeric_limits<double>::infinity();
  std::vector<double> extra = opts.extra_samples;
  std::sort(extra.begin(), extra.end());
  std::size_t extra_idx = 0;
  std::size_t next_grid = 1;

  // Candidates whose distance to the whole segment is at least the running
  // minimum cannot lower it, so `lb` lets sampling skip the visibility test.
  std::vector<double> lb;
  auto distance_on = [&](std::size_t c, Vec2 a, Vec2 b) {
    double m = std::numeric_limits<double>::infinity();
    const auto& cs = candidates[c];
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (i < lb.size() && lb[i] >= std::min(m, running_min)) continue;
      m = std::min(m, detail::candidate_distance(s.chart(c), cs[i], a, b, tol.len));
    }
    return m;
  };
  // Record m(T) samples falling on the segment a->b that starts at arclength s0.
  auto sample_segment = [&](std::size_t c, Vec2 a, Vec2 b, double s0) {
    if (!opts.record_min_distance) return;
    const double len = norm(b - a);
    const Vec2 dir = len > 0 ? (b - a) / len : Vec2{};
    lb.clear();
    for (const auto& cand : candidates[c]) lb.push_back(norm(cand.point - (a + (b - a) * closest_parameter(cand.point, a, b))));
    auto emit = [&](double T) {
      const double m = distance_on(c, a, a + dir * (T - s0));
      running_min = std::min(running_min, m);
      if (!r.min_distance_series.empty() && r.min_distance_series.back().first >= T) {
        r.min_distance_series.back().second = running_min;
      } else {
        r.min_distance_series.emplace_back(T, running_min);
      }
    };
    while (true) {
      const double grid = opts.sample_step > 0 ? next_grid * opts.sample_step : std::numeric_limits<double>::infinity();
      const double ex = extra_idx < extra.size() ? extra[extra_idx] : std::numeric_limits<double>::infinity();
      const double T = std::min(grid, ex);
      if (T > s0 + len) break;
      if (T >= s0) emit(T);
      if (grid <= T) ++next_grid;
      if (ex <= T) ++extra_idx;
    }
    emit(s0 + len);
    lb.clear();
  };

  if (opts.record_min_distance) {
    running_min = distance_on(chart, p, p);
    r.min_distance_series.emplace_back(0.0, running_min);
  }

  double arclength = 0.0;
  Isometry link = Isometry::identity();
  for (std::size_t step = 0;; ++step) {
    if (step >= opts.max_steps) throw Error(ErrorCode::InvalidArgument, "trace exceeded the step limit");
    const auto& poly = s.chart(chart);
    const detail::StepHit hit = detail::next_hit(poly, p, d, skip_vertex, tol);
    Vec2 q = hit.vertex ? poly.vertex(*hit.vertex)
                        : poly.edge_start(*hit.edge) + (poly.edge_end(*hit.edge) - poly.edge_start(*hit.edge)) * hit.edge_param;
    double t = hit.t;

    bool truncated = false;
    if (arclength + t >= max_length) {
      t = max_length - arclength;
      q = p + d * t;
      truncated = true;
    }

    if (opts.detect_recurrence && chart == r.start.chart && norm(d - r.start.direction) < tol.rec) {
      const Vec2 w = r.start.point - p;
      const double tp = dot(w, d);
      const double off = std::abs(cross(d, w));
      // After the first step, arriving on the start point itself also closes
      // the loop; this happens when the start lies on an edge.
      if (off < tol.rec && (tp > tol.len || (step > 0 && tp > -tol.len)) && tp <= t + tol.len) {
        const Vec2 end = tp > tol.len ? p + d * tp : p;
        if (tp > tol.len) {
          r.segments.push_back({chart, p, end, link});
          sample_segment(chart, p, end, arclength);
          arclength += tp;
        }
        TraceEvent ev;
        ev.kind = EventKind::SelfRecurrence;
        ev.arclength = arclength;
        ev.chart = chart;
        ev.point = end;
        ev.residual = off;
        r.events.push_back(ev);
        r.end = {chart, end, d, arclength};
        break;
      }
    }

    r.segments.push_back({chart, p, q, link});
    sample_segment(chart, p, q, arclength);
    arclength += t;

    if (truncated) {
      TraceEvent ev;
      ev.kind = EventKind::MaxLengthReached;
      ev.arclength = arclength;
      ev.chart = chart;
      ev.point = q;
      r.events.push_back(ev);
      r.end = {chart, q, d, arclength};
      break;
    }

    if (hit.edge) {
      const EdgeRef out{chart, *hit.edge};
      const EdgeRef nb = s.partner(out);
      TraceEvent ev;
      ev.kind = EventKind::EdgeCross;
      ev.arclength = arclength;
      ev.chart = chart;
      ev.point = q;
      ev.edge = out;
      ev.gluing = s.gluing_of(out).first;
      r.events.push_back(ev);
      const auto& np = s.chart(nb.chart);
      p = np.edge_end(nb.edge) + (np.edge_start(nb.edge) - np.edge_end(nb.edge)) * hit.edge_param;
      d = normalized(s.crossing(out).apply_dir(d));
      link = s.crossing(nb);
      chart = nb.chart;
      skip_vertex.reset();
      continue;
    }

    // Vertex hit.
    const Corner at{chart, *hit.vertex};
    const std::size_t cls_id = s.class_of(at);
    const auto& cls = s.vertex_class(cls_id);
    const std::size_t k_in = s.position_in_class(at);
    const double psi_in = s.cone_coordinate(at, -d);
    TraceEvent ev;
    ev.arclength = arclength;
    ev.chart = chart;
    ev.point = q;
    ev.vertex_class = cls_id;
    ev.vertex = *hit.vertex;
    ev.incoming = d;
    double psi_out = 0.0;
    if (!cls.singular()) {
      ev.kind = EventKind::EdgeCross;
      r.events.push_back(ev);
      psi_out = psi_in + kPi;
    } else {
      ev.kind = EventKind::ConeHit;
      ev.sector = continuation_sector(s, cls_id, psi_in);
      r.events.push_back(ev);
      const bool can_continue = cls.angle >= kTwoPi - tol.angle;
      if (opts.stop_on_cone || !can_continue) {
        r.end = {chart, q, d, arclength};
        break;
      }
      psi_out = psi_in + 0.5 * cls.angle;
    }
    const VertexTurn turn = turn_at_vertex(s, cls_id, k_in, psi_in, wrap_angle(psi_out, cls.angle));
    const Corner nc = cls.corners[turn.corner];
    chart = nc.chart;
    p = s.chart(chart).vertex(nc.vertex);
    d = turn.direction;
    link = turn.to_arrival;
    skip_vertex = nc.vertex;
  }
  r.total_length = arclength;
  return r;
}

/// Developed image of a trace: `frames[k]` maps segment k's chart into the
/// plane of the anchor segment, `points` are the developed segment endpoints
/// (segments.size() + 1 of them).
struct DevelopedPath {
  std::vector<Isometry> frames;
  std::vector<Vec2> points;
  std::vector<double> arclengths;  // arclength at each point
};

inline std::size_t segment_at(const TraceResult& tr, double arclength) {
  double acc = 0.0;
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    const double len = tr.segments[k].length();
    if (arclength <= acc + len || k + 1 == tr.segments.size()) return k;
    acc += len;
  }
  return 0;
}

inline DevelopedPath develop(const TraceResult& tr, std::optional<double> anchor = std::nullopt) {
  DevelopedPath dp;
  if (tr.segments.empty()) return dp;
  dp.frames.reserve(tr.segments.size());
  Isometry g = Isometry::identity();
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    if (k > 0) g = g * tr.segments[k].to_previous;
    dp.frames.push_back(g);
  }
  if (anchor) {
    const Isometry rebase = dp.frames[segment_at(tr, *anchor)].inverse();
    for (auto& f : dp.frames) f = rebase * f;
  }
  double acc = 0.0;
  dp.points.push_back(dp.frames[0].apply(tr.segments[0].start));
  dp.arclengths.push_back(0.0);
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    acc += tr.segments[k].length();
    dp.points.push_back(dp.frames[k].apply(tr.segments[k].end));
    dp.arclengths.push_back(acc);
  }
  return dp;
}

/// Max perpendicular deviation of developed vertices from the chord through
/// the developed endpoints, divided by the total length.
inline double developed_collinearity(const TraceResult& tr) {
  const DevelopedPath dp = develop(tr);
  if (dp.points.size() < 2 || tr.total_length <= 0) return 0.0;
  const Vec2 a = dp.points.front();
  const Vec2 b = dp.points.back();
  const double chord = norm(b - a);
  if (chord == 0.0) return 0.0;
  const Vec2 u = (b - a) / chord;
  double dev = 0.0;
  for (const Vec2 p : dp.points) dev = std::max(dev, std::abs(cross(u, p - a)));
  return dev / tr.total_length;
}

/// Position at arclength `s` in the developed plane of `dp`.
inline Vec2 developed_position(const TraceResult& tr, const DevelopedPath& dp, double s) {
  std::size_t k = 0;
  // Binary search over cumulative arclengths.
  auto it = std::upper_bound(dp.arclengths.begin(), dp.arclengths.end(), s);
  k = it == dp.arclengths.begin() ? 0 : static_cast<std::size_t>(it - dp.arclengths.begin()) - 1;
  k = std::min(k, tr.segments.size() - 1);
  const auto& seg = tr.segments[k];
  const double len = seg.length();
  const double f = len > 0 ? std::clamp((s - dp.arclengths[k]) / len, 0.0, 1.0) : 0.0;
  return dp.frames[k].apply(seg.start + (seg.end - seg.start) * f);
}

struct GeodesicDistance {
  double value = 0.0;
  double truncation_bound = 0.0;
};

/// Compact-open distance between two trajectories: Simpson quadrature of
/// |g1(t) - g2(t)| e^{-|t|} over [-W, W], with g_i(0) at arclength anchor_i.
/// Points are compared in the developed plane of the chart holding both
/// anchors.
inline GeodesicDistance geodesic_distance(const ConeSurface& s, const TraceResult& t1, double anchor1,
                                          const TraceResult& t2, double anchor2, double window, double step = 1e-3) {
  if (!(window > 0) || !(step > 0)) throw Error(ErrorCode::InvalidArgument, "window and step must be positive");
  if (t1.segments.empty() || t2.segments.empty())
    throw Error(ErrorCode::IncomparableTraces, "empty trace");
  const double slack = 1e-9 * std::max(1.0, window);
  for (const auto* tr : {&t1, &t2}) {
    const double a = tr == &t1 ? anchor1 : anchor2;
    if (a - window < -slack || a + window > tr->total_length + slack)
      throw Error(ErrorCode::InvalidArgument, "trace does not cover the window around its anchor");
  }
  const std::size_t k1 = segment_at(t1, anchor1);
  const std::size_t k2 = segment_at(t2, anchor2);
  if (t1.segments[k1].chart != t2.segments[k2].chart)
    throw Error(ErrorCode::IncomparableTraces, "anchors lie in different charts");
  const DevelopedPath d1 = develop(t1, anchor1);
  const DevelopedPath d2 = develop(t2, anchor2);

  std::size_t n = static_cast<std::size_t>(std::ceil(2 * window / step));
  if (n % 2) ++n;
  const double h = 2 * window / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = -window + h * static_cast<double>(i);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double dist = norm(developed_position(t1, d1, anchor1 + t) - developed_position(t2, d2, anchor2 + t));
    sum += w * dist * std::exp(-std::abs(t));
  }
  GeodesicDistance g;
  g.value = sum * h / 3.0;
  g.truncation_bound = 2.0 * s.total_chart_diameter() * std::exp(-window);
  return g;
}

/// A trace covering [-window, window] around `state`: traced backwards first,
/// then forwards from where the backward trace stopped. `anchor` is the
/// arclength of `state` on the returned trace.
struct WindowTrace {
  TraceResult trace;
  double anchor = 0.0;
};

inline WindowTrace trace_window(const ConeSurface& s, const GeodesicState& state, double window,
                                TraceOptions opts = {}) {
  opts.detect_recurrence = false;
  TraceOptions back_opts = opts;
  back_opts.record_min_distance = false;
  const TraceResult back = trace(s, {state.chart, state.point, -state.direction, 0.0}, window, back_opts);
  WindowTrace w;
  w.anchor = back.total_length;
  w.trace = trace(s, {back.end.chart, back.end.point, -back.end.direction, 0.0}, back.total_length + window, opts);
  return w;
}

struct SelfIntersectionPrediction {
  double t_prime = 0.0;  // half-gap of the two self-intersection parameters
  double T = 0.0;        // distance of the intersection point from the cone point
};

/// For a geodesic passing a cone point of angle theta < pi at closest
/// distance c0, the path meets itself at parameters t_i +- t' at distance T
/// from the cone point.
inline SelfIntersectionPrediction predict_self_intersection(double c0, double theta) {
  if (!(theta > 0) || theta >= kPi)
    throw Error(ErrorCode::AngleOutOfRange, "cone angle must lie in (0, pi), got " + std::to_string(theta));
  if (!(c0 > 0)) throw Error(ErrorCode::InvalidArgument, "closest distance must be positive");
  return {c0 * std::tan(0.5 * theta), c0 / std::cos(0.5 * theta)};
}

struct MinDistanceReport {
  std::vector<std::pair<double, double>> series;  // (T_i, m(T_i))
  bool non_increasing = true;
  bool reached_end = true;  // false if the trace stopped early (cone hit or recurrence)
  double final_value = 0.0;
  TraceResult trace;
};

/// m(T_i) = distance from the trajectory up to T_i to the singular set.
inline MinDistanceReport min_distance_experiment(const ConeSurface& s, const GeodesicState& start,
                                                 const std::vector<double>& lengths, TraceOptions opts = {}) {
  if (lengths.empty()) throw Error(ErrorCode::InvalidArgument, "no lengths given");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(lengths[i] > 0) || (i > 0 && lengths[i] <= lengths[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "lengths must be positive and strictly increasing");
  }
  opts.record_min_distance = true;
  opts.extra_samples = lengths;
  MinDistanceReport rep;
  rep.trace = trace(s, start, lengths.back(), opts);
  const auto& ser = rep.trace.min_distance_series;
  for (const double T : lengths) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& [a, v] : ser) {
      if (a > T + 1e-12) break;
      m = v;
    }
    if (T > rep.trace.total_length + 1e-9) rep.reached_end = false;
    rep.series.emplace_back(T, m);
  }
  for (std::size_t i = 1; i < rep.series.size(); ++i)
    if (rep.series[i].second > rep.series[i - 1].second) rep.non_increasing = false;
  rep.final_value = rep.series.back().second;
  return rep;
}

}  // namespace conesurf
