// Closed Euclidean cone surfaces presented as planar polygons glued along
// edges. A ConeSurface is immutable once built; all queries are const and the
// object can be shared between threads.
#pragma once

#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conesurf/error.hpp"
#include "conesurf/geometry.hpp"

namespace conesurf {

struct Tolerances {
  double len = 1e-9;    // edge length agreement, point coincidence
  double angle = 1e-9;  // cone angle comparisons
  double hit = 1e-9;    // a ray this close to a vertex hits it
  double rec = 1e-7;    // state recurrence
  double dev = 1e-8;    // developed collinearity, per unit length
};

struct PolygonChart {
  std::string id;
  std::vector<Vec2> vertices;  // counterclockwise

  std::size_t size() const { return vertices.size(); }
  Vec2 vertex(std::size_t i) const { return vertices[i % vertices.size()]; }
  Vec2 edge_start(std::size_t e) const { return vertex(e); }
  Vec2 edge_end(std::size_t e) const { return vertex(e + 1); }
  double edge_length(std::size_t e) const { return norm(edge_end(e) - edge_start(e)); }
};

struct EdgeRef {
  std::size_t chart = 0;
  std::size_t edge = 0;
  bool operator==(const EdgeRef&) const = default;
  auto operator<=>(const EdgeRef&) const = default;
};

struct Corner {
  std::size_t chart = 0;
  std::size_t vertex = 0;
  bool operator==(const Corner&) const = default;
  auto operator<=>(const Corner&) const = default;
};

struct Gluing {
  EdgeRef a;
  EdgeRef b;
  Isometry a_to_b;  // chart a coordinates -> chart b coordinates
};

enum class VertexKind { Small, Marked, Large, Regular };

constexpr std::string_view to_string(VertexKind k) {
  switch (k) {
    case VertexKind::Small: return "small";
    case VertexKind::Marked: return "marked";
    case VertexKind::Large: return "large";
    case VertexKind::Regular: return "regular";
  }
  return "?";
}

/// One point of the surface that is a polygon corner. Corners are listed in
/// counterclockwise order around the point; `offsets[k]` is the cone angular
/// coordinate at which corner k starts (its outgoing edge), so the corner
/// covers [offsets[k], offsets[k] + corner_angles[k]).
struct VertexClass {
  std::size_t id = 0;
  std::vector<Corner> corners;
  std::vector<double> corner_angles;
  std::vector<double> offsets;
  double angle = 0.0;
  VertexKind kind = VertexKind::Marked;

  bool singular() const { return kind != VertexKind::Regular; }
};

/// Input form of a surface, identical in content to the JSON file.
struct SurfaceDescription {
  struct GluingSpec {
    std::string a_chart;
    std::size_t a_edge = 0;
    std::string b_chart;
    std::size_t b_edge = 0;
  };
  std::vector<PolygonChart> polygons;
  std::vector<GluingSpec> gluings;
  /// Corners whose (2pi) vertex class is an ordinary point, not a marked one.
  std::vector<std::pair<std::string, std::size_t>> unmarked;
};

struct BuildOptions {
  Tolerances tol{};
  bool allow_disconnected = false;
};

class ConeSurface;
ConeSurface build_surface(const SurfaceDescription& desc, const BuildOptions& opts = {});

class ConeSurface {
 public:
  const std::vector<PolygonChart>& charts() const { return charts_; }
  const PolygonChart& chart(std::size_t c) const { return charts_.at(c); }
  const std::vector<Gluing>& gluings() const { return gluings_; }
  const std::vector<VertexClass>& vertex_classes() const { return classes_; }
  const VertexClass& vertex_class(std::size_t id) const {
    if (id >= classes_.size())
      throw Error(ErrorCode::UnknownVertexClass, "vertex class " + std::to_string(id));
    return classes_[id];
  }
  int euler_characteristic() const { return euler_; }
  std::size_t component_count() const { return components_; }
  const Tolerances& tolerances() const { return tol_; }
  const SurfaceDescription& description() const { return desc_; }

  std::size_t chart_index(const std::string& id) const {
    for (std::size_t i = 0; i < charts_.size(); ++i)
      if (charts_[i].id == id) return i;
    throw Error(ErrorCode::InvalidArgument, "unknown chart id '" + id + "'");
  }

  /// Gluing index and whether `e` is its `a` side.
  std::pair<std::size_t, bool> gluing_of(EdgeRef e) const { return edge_gluing_.at(e.chart).at(e.edge); }

  EdgeRef partner(EdgeRef e) const {
    const auto [g, is_a] = gluing_of(e);
    return is_a ? gluings_[g].b : gluings_[g].a;
  }

  /// Maps coordinates of e's chart to the coordinates of the partner chart.
  const Isometry& crossing(EdgeRef e) const { return crossing_.at(e.chart).at(e.edge); }

  std::size_t class_of(Corner c) const { return corner_class_.at(c.chart).at(c.vertex); }
  /// Position of the corner in its class's counterclockwise list.
  std::size_t position_in_class(Corner c) const { return corner_pos_.at(c.chart).at(c.vertex); }

  double corner_angle(Corner c) const {
    const auto& p = charts_.at(c.chart);
    const Vec2 v = p.vertex(c.vertex);
    return ccw_angle(p.vertex(c.vertex + 1) - v, p.vertex(c.vertex + p.size() - 1) - v);
  }

  double max_chart_diameter() const {
    double d = 0.0;
    for (const auto& c : charts_) d = std::max(d, polygon_diameter(c.vertices));
    return d;
  }

  double total_chart_diameter() const {
    double d = 0.0;
    for (const auto& c : charts_) d += polygon_diameter(c.vertices);
    return d;
  }

  /// Cone angular coordinate of a direction leaving corner `c` into its
  /// polygon. The direction is measured counterclockwise from the corner's
  /// outgoing edge.
  double cone_coordinate(Corner c, Vec2 dir) const {
    const auto& p = charts_.at(c.chart);
    const Vec2 v = p.vertex(c.vertex);
    const auto& cls = classes_[class_of(c)];
    const double local = ccw_angle(p.vertex(c.vertex + 1) - v, dir);
    const double a = cls.corner_angles[position_in_class(c)];
    // Directions a hair clockwise of the outgoing edge wrap to ~2pi.
    const double clamped = local > a ? (local > 0.5 * (a + kTwoPi) ? 0.0 : a) : local;
    return wrap_angle(cls.offsets[position_in_class(c)] + clamped, cls.angle);
  }

  /// Corner position containing cone coordinate psi and the unit direction
  /// of psi in that corner's chart.
  std::pair<std::size_t, Vec2> direction_at(std::size_t class_id, double psi) const {
    const auto& cls = vertex_class(class_id);
    psi = wrap_angle(psi, cls.angle);
    std::size_t k = cls.corners.size() - 1;
    for (std::size_t i = 0; i < cls.corners.size(); ++i) {
      if (psi < cls.offsets[i] + cls.corner_angles[i]) {
        k = i;
        break;
      }
    }
    const Corner c = cls.corners[k];
    const auto& p = charts_[c.chart];
    const Vec2 out = normalized(p.vertex(c.vertex + 1) - p.vertex(c.vertex));
    return {k, rotate(out, std::clamp(psi - cls.offsets[k], 0.0, cls.corner_angles[k]))};
  }

  /// Isometry from the chart of corner `to` into the chart of corner `from`,
  /// obtained by walking around the class counterclockwise (or clockwise)
  /// and composing the gluings crossed on the way.
  Isometry corner_walk(std::size_t class_id, std::size_t from, std::size_t to, bool ccw = true) const {
    const auto& cls = vertex_class(class_id);
    const std::size_t m = cls.corners.size();
    Isometry acc = Isometry::identity();
    std::size_t k = from;
    while (k != to) {
      if (ccw) {
        const std::size_t next = (k + 1) % m;
        const Corner c = cls.corners[next];
        acc = acc * crossing({c.chart, c.vertex});
        k = next;
      } else {
        const std::size_t prev = (k + m - 1) % m;
        const Corner c = cls.corners[prev];
        const std::size_t n = charts_[c.chart].size();
        acc = acc * crossing({c.chart, (c.vertex + n - 1) % n});
        k = prev;
      }
    }
    return acc;
  }

  /// Indices of singular vertex classes.
  std::vector<std::size_t> singular_classes() const {
    std::vector<std::size_t> out;
    for (const auto& c : classes_)
      if (c.singular()) out.push_back(c.id);
    return out;
  }

 private:
  friend ConeSurface build_surface(const SurfaceDescription&, const BuildOptions&);

  std::vector<PolygonChart> charts_;
  std::vector<Gluing> gluings_;
  std::vector<VertexClass> classes_;
  std::vector<std::vector<std::pair<std::size_t, bool>>> edge_gluing_;
  std::vector<std::vector<Isometry>> crossing_;
  std::vector<std::vector<std::size_t>> corner_class_;
  std::vector<std::vector<std::size_t>> corner_pos_;
  int euler_ = 0;
  std::size_t components_ = 1;
  Tolerances tol_{};
  SurfaceDescription desc_;
};

namespace detail {

inline std::string edge_name(const PolygonChart& p, std::size_t e) {
  return "polygon '" + p.id + "' edge " + std::to_string(e);
}

inline void validate_polygon(const PolygonChart& p, const Tolerances& tol) {
  const std::size_t n = p.size();
  if (n < 3)
    throw Error(ErrorCode::NonSimplePolygon, "polygon '" + p.id + "' has fewer than 3 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_finite(p.vertices[i]))
      throw Error(ErrorCode::ParseError, "polygon '" + p.id + "' vertex " + std::to_string(i) + " is not finite");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (norm(p.vertices[i] - p.vertices[j]) <= tol.len)
        throw Error(ErrorCode::NonSimplePolygon, "polygon '" + p.id + "' repeats vertex " + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Vec2 a = p.edge_start(i), b = p.edge_end(i), c = p.edge_start(j), d = p.edge_end(j);
      if (adjacent) {
        // Adjacent edges share one vertex; they must not fold back onto each other.
        const Vec2 shared = (j == i + 1) ? b : a;
        const Vec2 u = (j == i + 1) ? a : b;
        const Vec2 w = (j == i + 1) ? d : c;
        if (std::abs(cross(u - shared, w - shared)) <= tol.len * norm(u - shared) &&
            dot(u - shared, w - shared) > 0)
          throw Error(ErrorCode::NonSimplePolygon,
                      "polygon '" + p.id + "' edges " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
        continue;
      }
      if (segments_touch(a, b, c, d, tol.len))
        throw Error(ErrorCode::NonSimplePolygon,
                    "polygon '" + p.id + "' edges " + std::to_string(i) + " and " + std::to_string(j) + " intersect");
    }
  }
  if (signed_area(p.vertices) <= 0)
    throw Error(ErrorCode::OrientationError, "polygon '" + p.id + "' is not counterclockwise");
}

}  // namespace detail

inline ConeSurface build_surface(const SurfaceDescription& desc, const BuildOptions& opts) {
  const Tolerances& tol = opts.tol;
  ConeSurface s;
  s.tol_ = tol;
  s.desc_ = desc;
  s.charts_ = desc.polygons;
  if (s.charts_.empty()) throw Error(ErrorCode::ParseError, "surface has no polygons");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < s.charts_.size(); ++i) {
    if (!index.emplace(s.charts_[i].id, i).second)
      throw Error(ErrorCode::ParseError, "duplicate polygon id '" + s.charts_[i].id + "'");
    detail::validate_polygon(s.charts_[i], tol);
  }
  auto lookup = [&](const std::string& id, std::size_t edge, std::size_t gi) {
    auto it = index.find(id);
    if (it == index.end())
      throw Error(ErrorCode::ParseError, "gluing " + std::to_string(gi) + " references unknown polygon '" + id + "'");
    if (edge >= s.charts_[it->second].size())
      throw Error(ErrorCode::ParseError, "gluing " + std::to_string(gi) + " edge index " + std::to_string(edge) +
                                             " out of range for polygon '" + id + "'");
    return EdgeRef{it->second, edge};
  };

  constexpr std::pair<std::size_t, bool> kUnset{static_cast<std::size_t>(-1), false};
  s.edge_gluing_.resize(s.charts_.size());
  s.crossing_.resize(s.charts_.size());
  for (std::size_t c = 0; c < s.charts_.size(); ++c) {
    s.edge_gluing_[c].assign(s.charts_[c].size(), kUnset);
    s.crossing_[c].resize(s.charts_[c].size());
  }

  for (std::size_t gi = 0; gi < desc.gluings.size(); ++gi) {
    const auto& g = desc.gluings[gi];
    const EdgeRef a = lookup(g.a_chart, g.a_edge, gi);
    const EdgeRef b = lookup(g.b_chart, g.b_edge, gi);
    if (a == b)
      throw Error(ErrorCode::DuplicateGluing, "gluing " + std::to_string(gi) + " glues " +
                                                  detail::edge_name(s.charts_[a.chart], a.edge) + " to itself");
    for (const EdgeRef e : {a, b}) {
      if (s.edge_gluing_[e.chart][e.edge] != kUnset)
        throw Error(ErrorCode::DuplicateGluing, detail::edge_name(s.charts_[e.chart], e.edge) + " is glued twice");
    }
    const auto& pa = s.charts_[a.chart];
    const auto& pb = s.charts_[b.chart];
    const double la = pa.edge_length(a.edge), lb = pb.edge_length(b.edge);
    if (std::abs(la - lb) > tol.len)
      throw Error(ErrorCode::EdgeLengthMismatch, detail::edge_name(pa, a.edge) + " has length " + std::to_string(la) +
                                                     " but " + detail::edge_name(pb, b.edge) + " has length " +
                                                     std::to_string(lb));
    const Isometry iso =
        Isometry::edge_to_edge(pa.edge_start(a.edge), pa.edge_end(a.edge), pb.edge_start(b.edge), pb.edge_end(b.edge));
    s.gluings_.push_back({a, b, iso});
    s.edge_gluing_[a.chart][a.edge] = {gi, true};
    s.edge_gluing_[b.chart][b.edge] = {gi, false};
    s.crossing_[a.chart][a.edge] = iso;
    s.crossing_[b.chart][b.edge] = iso.inverse();
  }
  for (std::size_t c = 0; c < s.charts_.size(); ++c)
    for (std::size_t e = 0; e < s.charts_[c].size(); ++e)
      if (s.edge_gluing_[c][e] == kUnset)
        throw Error(ErrorCode::UnmatchedEdge, detail::edge_name(s.charts_[c], e) + " is not glued");

  // Connectivity over the chart adjacency graph.
  std::vector<std::size_t> parent(s.charts_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& g : s.gluings_) parent[find(g.a.chart)] = find(g.b.chart);
  s.components_ = 0;
  for (std::size_t c = 0; c < s.charts_.size(); ++c)
    if (find(c) == c) ++s.components_;
  if (s.components_ > 1 && !opts.allow_disconnected)
    throw Error(ErrorCode::DisconnectedSurface,
                "surface has " + std::to_string(s.components_) + " connected components");

  // Corner orbits. The counterclockwise neighbour of corner (c, i) lies across
  // edge i-1, at the start vertex of the partner edge.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  s.corner_class_.resize(s.charts_.size());
  s.corner_pos_.resize(s.charts_.size());
  for (std::size_t c = 0; c < s.charts_.size(); ++c) {
    s.corner_class_[c].assign(s.charts_[c].size(), kNone);
    s.corner_pos_[c].assign(s.charts_[c].size(), kNone);
  }
  for (std::size_t c = 0; c < s.charts_.size(); ++c) {
    for (std::size_t i = 0; i < s.charts_[c].size(); ++i) {
      if (s.corner_class_[c][i] != kNone) continue;
      VertexClass cls;
      cls.id = s.classes_.size();
      Corner cur{c, i};
      double total = 0.0;
      while (s.corner_class_[cur.chart][cur.vertex] == kNone) {
        s.corner_class_[cur.chart][cur.vertex] = cls.id;
        s.corner_pos_[cur.chart][cur.vertex] = cls.corners.size();
        const double a = s.corner_angle(cur);
        cls.corners.push_back(cur);
        cls.corner_angles.push_back(a);
        cls.offsets.push_back(total);
        total += a;
        const std::size_t n = s.charts_[cur.chart].size();
        const EdgeRef p = s.partner({cur.chart, (cur.vertex + n - 1) % n});
        cur = {p.chart, p.edge};
      }
      if (cur != Corner{c, i})
        throw Error(ErrorCode::OrientationError,
                    "corner orbit of polygon '" + s.charts_[c].id + "' vertex " + std::to_string(i) + " does not close");
      cls.angle = total;
      if (std::abs(total - kTwoPi) <= tol.angle)
        cls.kind = VertexKind::Marked;
      else
        cls.kind = total < kTwoPi ? VertexKind::Small : VertexKind::Large;
      s.classes_.push_back(std::move(cls));
    }
  }

  for (const auto& [id, v] : desc.unmarked) {
    auto it = index.find(id);
    if (it == index.end() || v >= s.charts_[it->second].size())
      throw Error(ErrorCode::InvalidMarking, "unmarked corner ('" + id + "', " + std::to_string(v) + ") does not exist");
    auto& cls = s.classes_[s.corner_class_[it->second][v]];
    if (cls.kind != VertexKind::Marked && cls.kind != VertexKind::Regular)
      throw Error(ErrorCode::InvalidMarking, "corner ('" + id + "', " + std::to_string(v) +
                                                 ") has cone angle " + std::to_string(cls.angle) +
                                                 "; only 2pi points can be unmarked");
    cls.kind = VertexKind::Regular;
  }

  s.euler_ = static_cast<int>(s.classes_.size()) - static_cast<int>(s.gluings_.size()) +
             static_cast<int>(s.charts_.size());
  return s;
}

inline double cone_angle(const ConeSurface& s, std::size_t class_id) { return s.vertex_class(class_id).angle; }

struct GaussBonnetReport {
  double lhs = 0.0;  // sum over classes of (2pi - angle)
  double rhs = 0.0;  // 2pi * chi
  double residual = 0.0;
  bool ok = false;
};

inline GaussBonnetReport validate_gauss_bonnet(const ConeSurface& s) {
  GaussBonnetReport r;
  for (const auto& c : s.vertex_classes()) r.lhs += kTwoPi - c.angle;
  r.rhs = kTwoPi * s.euler_characteristic();
  r.residual = std::abs(r.lhs - r.rhs);
  r.ok = r.residual <= s.tolerances().angle;
  return r;
}

struct SingularityPartition {
  std::vector<std::size_t> small;
  std::vector<std::size_t> marked;
  std::vector<std::size_t> large;
  std::vector<std::size_t> regular;
};

inline SingularityPartition classify_singularities(const ConeSurface& s) {
  SingularityPartition p;
  for (const auto& c : s.vertex_classes()) {
    switch (c.kind) {
      case VertexKind::Small: p.small.push_back(c.id); break;
      case VertexKind::Marked: p.marked.push_back(c.id); break;
      case VertexKind::Large: p.large.push_back(c.id); break;
      case VertexKind::Regular: p.regular.push_back(c.id); break;
    }
  }
  return p;
}

}  // namespace conesurf
