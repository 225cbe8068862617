// Branched covers assembled from sheet permutations on the gluings.
//
// Crossing gluing g from its a side to its b side moves sheet s to
// sigma_g(s); crossing back applies the inverse. Permutations are stored
// 0-based; the JSON form is 1-based one-line notation.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conesurf/error.hpp"
#include "conesurf/surface.hpp"
#include "conesurf/tracer.hpp"

namespace conesurf {

using Permutation = std::vector<std::size_t>;

struct CoverSpec {
  std::size_t degree = 1;
  std::map<std::size_t, Permutation> edge_permutations;  // gluing index -> sigma; identity if absent
};

inline Permutation identity_permutation(std::size_t d) {
  Permutation p(d);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return p;
}

inline Permutation inverse(const Permutation& p) {
  Permutation q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) q[p[i]] = i;
  return q;
}

inline bool is_permutation_of(const Permutation& p, std::size_t d) {
  if (p.size() != d) return false;
  std::vector<bool> seen(d, false);
  for (const std::size_t x : p) {
    if (x >= d || seen[x]) return false;
    seen[x] = true;
  }
  return true;
}

/// Cycle lengths, longest first.
inline std::vector<std::size_t> cycle_type(const Permutation& p) {
  std::vector<std::size_t> out;
  std::vector<bool> seen(p.size(), false);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = p[j]) {
      seen[j] = true;
      ++len;
    }
    out.push_back(len);
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

inline void validate_cover_spec(const ConeSurface& base, const CoverSpec& spec) {
  if (spec.degree == 0) throw Error(ErrorCode::InvalidPermutation, "cover degree must be positive");
  for (const auto& [g, p] : spec.edge_permutations) {
    if (g >= base.gluings().size())
      throw Error(ErrorCode::InvalidPermutation, "gluing " + std::to_string(g) + " does not exist");
    if (!is_permutation_of(p, spec.degree))
      throw Error(ErrorCode::InvalidPermutation,
                  "gluing " + std::to_string(g) + ": not a permutation of 1.." + std::to_string(spec.degree));
  }
}

/// Sheet reached after crossing edge `e` (from e's chart into its partner).
inline std::size_t cross_sheet(const ConeSurface& base, const CoverSpec& spec, EdgeRef e, std::size_t sheet) {
  const auto [g, is_a] = base.gluing_of(e);
  const auto it = spec.edge_permutations.find(g);
  if (it == spec.edge_permutations.end()) return sheet;
  return is_a ? it->second[sheet] : inverse(it->second)[sheet];
}

/// Permutation of sheets after one counterclockwise turn around a vertex
/// class, starting and ending in the chart of its first corner.
inline Permutation monodromy(const ConeSurface& base, const CoverSpec& spec, std::size_t class_id) {
  const auto& cls = base.vertex_class(class_id);
  Permutation out(spec.degree);
  for (std::size_t s0 = 0; s0 < spec.degree; ++s0) {
    std::size_t s = s0;
    for (const Corner c : cls.corners) {
      // Leaving corner c counterclockwise crosses its incoming edge.
      const std::size_t n = base.chart(c.chart).size();
      s = cross_sheet(base, spec, {c.chart, (c.vertex + n - 1) % n}, s);
    }
    out[s0] = s;
  }
  return out;
}

struct CoverClassInfo {
  std::size_t cover_class = 0;
  std::size_t base_class = 0;
  std::size_t local_degree = 0;
  double angle = 0.0;
};

struct BranchReport {
  struct BaseClass {
    std::size_t id = 0;
    double angle = 0.0;
    Permutation monodromy;
    std::vector<std::size_t> cycle_type;
  };
  std::size_t degree = 1;
  std::vector<BaseClass> base_classes;
  std::vector<CoverClassInfo> cover_classes;
  int euler_characteristic = 0;
  std::size_t components = 1;
  bool connected = true;
};

struct Cover {
  SurfaceDescription description;
  ConeSurface surface;
  BranchReport report;
  CoverSpec spec;

  std::size_t degree() const { return spec.degree; }
  /// Cover chart index of base chart c on sheet s.
  std::size_t chart_index(std::size_t c, std::size_t s) const { return c * spec.degree + s; }
  std::size_t base_chart(std::size_t cover_chart) const { return cover_chart / spec.degree; }
  std::size_t sheet(std::size_t cover_chart) const { return cover_chart % spec.degree; }
};

/// Smallest odd d with d * theta > 2pi for every small cone angle theta.
inline std::size_t default_odd_degree(const ConeSurface& s) {
  std::size_t d = 0;
  for (const auto& c : s.vertex_classes()) {
    if (c.kind != VertexKind::Small) continue;
    std::size_t k = 1;
    while (static_cast<double>(k) * c.angle <= kTwoPi + s.tolerances().angle) k += 2;
    d = std::max(d, k);
  }
  if (d == 0) throw Error(ErrorCode::NoSmallSingularities, "surface has no cone point of angle < 2pi");
  return d;
}

inline Cover build_cover(const ConeSurface& base, const CoverSpec& spec) {
  validate_cover_spec(base, spec);
  const std::size_t d = spec.degree;
  auto sheet_id = [&](std::size_t c, std::size_t s) { return base.chart(c).id + "@" + std::to_string(s + 1); };

  SurfaceDescription desc;
  for (std::size_t c = 0; c < base.charts().size(); ++c)
    for (std::size_t s = 0; s < d; ++s) desc.polygons.push_back({sheet_id(c, s), base.chart(c).vertices});
  for (std::size_t g = 0; g < base.gluings().size(); ++g) {
    const auto& gl = base.gluings()[g];
    const auto it = spec.edge_permutations.find(g);
    for (std::size_t s = 0; s < d; ++s) {
      const std::size_t t = it == spec.edge_permutations.end() ? s : it->second[s];
      desc.gluings.push_back({sheet_id(gl.a.chart, s), gl.a.edge, sheet_id(gl.b.chart, t), gl.b.edge});
    }
  }

  BuildOptions opts;
  opts.tol = base.tolerances();
  opts.allow_disconnected = true;
  ConeSurface cover = build_surface(desc, opts);

  // Unmarked base points stay unmarked upstairs where the cover is unbranched.
  bool relabel = false;
  for (const auto& cc : cover.vertex_classes()) {
    const Corner c0 = cc.corners.front();
    const std::size_t bcls = base.class_of({c0.chart / d, c0.vertex});
    if (base.vertex_class(bcls).kind == VertexKind::Regular &&
        std::abs(cc.angle - base.vertex_class(bcls).angle) <= base.tolerances().angle) {
      desc.unmarked.push_back({cover.chart(c0.chart).id, c0.vertex});
      relabel = true;
    }
  }
  if (relabel) cover = build_surface(desc, opts);

  BranchReport rep;
  rep.degree = d;
  for (const auto& bc : base.vertex_classes()) {
    BranchReport::BaseClass b;
    b.id = bc.id;
    b.angle = bc.angle;
    b.monodromy = monodromy(base, spec, bc.id);
    b.cycle_type = cycle_type(b.monodromy);
    rep.base_classes.push_back(std::move(b));
  }
  for (const auto& cc : cover.vertex_classes()) {
    const Corner c0 = cc.corners.front();
    const std::size_t bcls = base.class_of({c0.chart / d, c0.vertex});
    const double ratio = cc.angle / base.vertex_class(bcls).angle;
    rep.cover_classes.push_back({cc.id, bcls, static_cast<std::size_t>(std::llround(ratio)), cc.angle});
  }
  rep.euler_characteristic = cover.euler_characteristic();
  rep.components = cover.component_count();
  rep.connected = rep.components == 1;
  return {std::move(desc), std::move(cover), std::move(rep), spec};
}

/// |chi(cover) - d chi(base) + sum over branch cycles of (length - 1)|.
inline long riemann_hurwitz_residual(const ConeSurface& base, const Cover& cover) {
  long ramification = 0;
  for (const auto& b : cover.report.base_classes)
    for (const std::size_t len : b.cycle_type) ramification += static_cast<long>(len) - 1;
  return std::labs(static_cast<long>(cover.surface.euler_characteristic()) -
                   static_cast<long>(cover.degree()) * base.euler_characteristic() + ramification);
}

struct MonodromySearchOptions {
  std::size_t node_budget = 10'000'000;
  bool require_connected = true;
};

/// First assignment, in lexicographic order over gluings and permutations,
/// with a d-cycle around every small cone point and trivial monodromy
/// everywhere else. nullopt when none exists or the budget runs out.
inline std::optional<CoverSpec> search_monodromy(const ConeSurface& base, std::size_t d,
                                                 const MonodromySearchOptions& opts = {}) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "degree must be positive");
  const std::size_t G = base.gluings().size();
  std::vector<Permutation> perms;
  {
    Permutation p = identity_permutation(d);
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
  }
  // A class can be checked once the last gluing around it is assigned.
  std::vector<std::vector<std::size_t>> check_after(G);
  for (const auto& cls : base.vertex_classes()) {
    std::size_t last = 0;
    for (const Corner c : cls.corners) {
      const std::size_t n = base.chart(c.chart).size();
      last = std::max(last, base.gluing_of({c.chart, (c.vertex + n - 1) % n}).first);
    }
    check_after[last].push_back(cls.id);
  }
  auto class_ok = [&](const CoverSpec& spec, std::size_t id) {
    const auto ct = cycle_type(monodromy(base, spec, id));
    if (base.vertex_class(id).kind == VertexKind::Small) return ct.size() == 1;
    return ct.size() == d;
  };
  auto connected = [&](const CoverSpec& spec) {
    const std::size_t n = base.charts().size() * d;
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t g = 0; g < G; ++g) {
      const auto& gl = base.gluings()[g];
      for (std::size_t s = 0; s < d; ++s)
        parent[find(gl.a.chart * d + s)] = find(gl.b.chart * d + spec.edge_permutations.at(g)[s]);
    }
    for (std::size_t x = 0; x < n; ++x)
      if (find(x) != find(0)) return false;
    return true;
  };

  CoverSpec spec;
  spec.degree = d;
  std::size_t nodes = 0;
  std::vector<std::size_t> choice(G, 0);
  std::size_t g = 0;
  bool descending = true;
  while (true) {
    if (descending) {
      if (g == G) {
        if (!opts.require_connected || connected(spec)) return spec;
        descending = false;
        if (g == 0) return std::nullopt;
        --g;
        continue;
      }
      choice[g] = 0;
    } else {
      ++choice[g];
    }
    if (choice[g] == perms.size()) {
      spec.edge_permutations.erase(g);
      if (g == 0) return std::nullopt;
      --g;
      descending = false;
      continue;
    }
    if (++nodes > opts.node_budget) return std::nullopt;
    spec.edge_permutations[g] = perms[choice[g]];
    bool ok = true;
    for (const std::size_t id : check_after[g]) ok = ok && class_ok(spec, id);
    if (ok) {
      ++g;
      descending = true;
    } else {
      descending = false;
    }
  }
}

/// The base trace re-traced on the cover from `sheet`, with its projection
/// checked against the base segment by segment.
inline TraceResult lift_trace(const ConeSurface& base, const Cover& cover, const TraceResult& base_trace,
                              std::size_t sheet) {
  if (sheet >= cover.degree()) throw Error(ErrorCode::InvalidArgument, "sheet out of range");
  if (cover.surface.charts().size() != base.charts().size() * cover.degree())
    throw Error(ErrorCode::InvalidArgument, "cover was not built over this base surface");
  for (const auto& ev : base_trace.events) {
    if (!ev.vertex_class) continue;
    const auto& b = cover.report.base_classes.at(*ev.vertex_class);
    if (b.cycle_type.size() != cover.degree())
      throw Error(ErrorCode::BranchPointOnPath, "trace meets branch class " + std::to_string(*ev.vertex_class) +
                                                    " at arclength " + std::to_string(ev.arclength));
  }
  if (base_trace.segments.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  const auto& first = base_trace.segments.front();
  TraceOptions o;
  o.record_min_distance = false;
  const TraceResult up = trace(cover.surface,
                               {cover.chart_index(first.chart, sheet), first.start, first.end - first.start, 0.0},
                               base_trace.total_length, o);
  if (up.segments.size() != base_trace.segments.size() ||
      std::abs(up.total_length - base_trace.total_length) > 1e-9 * std::max(1.0, base_trace.total_length))
    throw Error(ErrorCode::DomainError, "lift does not project onto the base trace");
  for (std::size_t k = 0; k < up.segments.size(); ++k) {
    const auto& a = up.segments[k];
    const auto& b = base_trace.segments[k];
    if (cover.base_chart(a.chart) != b.chart || norm(a.start - b.start) > 1e-9 || norm(a.end - b.end) > 1e-9)
      throw Error(ErrorCode::DomainError, "lift segment " + std::to_string(k) + " does not project onto the base");
  }
  return up;
}

// JSON: {"degree": d, "permutations": {"<gluing index>": [1-based one-line]}}.

inline CoverSpec cover_spec_from_json(const nlohmann::json& j, std::size_t degree) {
  CoverSpec spec;
  spec.degree = degree;
  const nlohmann::json& perms = j.contains("permutations") ? j.at("permutations") : j;
  if (!perms.is_object()) throw Error(ErrorCode::ParseError, "monodromy must be an object keyed by gluing index");
  for (const auto& [key, val] : perms.items()) {
    std::size_t g = 0;
    try {
      std::size_t used = 0;
      g = std::stoul(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "monodromy key '" + key + "' is not a gluing index");
    }
    if (!val.is_array()) throw Error(ErrorCode::ParseError, "monodromy for gluing " + key + " must be an array");
    Permutation p;
    for (const auto& x : val) {
      if (!x.is_number_integer() || x.get<long>() < 1)
        throw Error(ErrorCode::InvalidPermutation, "gluing " + key + ": entries must be integers in 1..d");
      p.push_back(x.get<std::size_t>() - 1);
    }
    spec.edge_permutations[g] = std::move(p);
  }
  return spec;
}

inline nlohmann::json to_json(const CoverSpec& spec) {
  nlohmann::json perms = nlohmann::json::object();
  for (const auto& [g, p] : spec.edge_permutations) {
    nlohmann::json a = nlohmann::json::array();
    for (const std::size_t x : p) a.push_back(x + 1);
    perms[std::to_string(g)] = a;
  }
  return {{"degree", spec.degree}, {"permutations", perms}};
}

inline nlohmann::json to_json(const BranchReport& r) {
  nlohmann::json j;
  j["degree"] = r.degree;
  j["euler_characteristic"] = r.euler_characteristic;
  j["components"] = r.components;
  j["connected"] = r.connected;
  j["base_classes"] = nlohmann::json::array();
  for (const auto& b : r.base_classes) {
    nlohmann::json m = nlohmann::json::array();
    for (const std::size_t x : b.monodromy) m.push_back(x + 1);
    j["base_classes"].push_back({{"id", b.id}, {"angle", b.angle}, {"monodromy", m}, {"cycle_type", b.cycle_type}});
  }
  j["cover_classes"] = nlohmann::json::array();
  for (const auto& c : r.cover_classes)
    j["cover_classes"].push_back(
        {{"id", c.cover_class}, {"base_class", c.base_class}, {"local_degree", c.local_degree}, {"angle", c.angle}});
  return j;
}

}  // namespace conesurf
