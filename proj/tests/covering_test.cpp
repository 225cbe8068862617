#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "conesurf/corpus.hpp"
#include "conesurf/covering.hpp"

using namespace conesurf;

namespace {

const ConeSurface& torus() {
  static const ConeSurface s = build_surface(corpus::flat_torus(true));
  return s;
}
const ConeSurface& pillowcase() {
  static const ConeSurface s = build_surface(corpus::pillowcase());
  return s;
}

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::InvalidArgument;
}

// V - E + F of the assembled cover counted directly from its description:
// corners are identified by following gluings, independently of the
// vertex-class code in build_surface.
int direct_euler(const SurfaceDescription& d) {
  std::map<std::string, std::size_t> idx;
  std::vector<std::size_t> offs;
  std::size_t n = 0;
  for (const auto& p : d.polygons) {
    idx[p.id] = offs.size();
    offs.push_back(n);
    n += p.vertices.size();
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto& g : d.gluings) {
    const std::size_t a = idx.at(g.a_chart), b = idx.at(g.b_chart);
    const std::size_t na = d.polygons[a].vertices.size(), nb = d.polygons[b].vertices.size();
    // Edge a: P0 -> P1 glued to edge b reversed: P0 ~ Q1, P1 ~ Q0.
    parent[find(offs[a] + g.a_edge)] = find(offs[b] + (g.b_edge + 1) % nb);
    parent[find(offs[a] + (g.a_edge + 1) % na)] = find(offs[b] + g.b_edge);
  }
  std::set<std::size_t> roots;
  for (std::size_t x = 0; x < n; ++x) roots.insert(find(x));
  return static_cast<int>(roots.size()) - static_cast<int>(d.gluings.size()) + static_cast<int>(d.polygons.size());
}

CoverSpec pillowcase_triple() {
  const auto spec = search_monodromy(pillowcase(), 3);
  EXPECT_TRUE(spec);
  return *spec;
}

}  // namespace

TEST(Permutations, CycleTypes) {
  EXPECT_EQ(cycle_type({1, 2, 0}), (std::vector<std::size_t>{3}));
  EXPECT_EQ(cycle_type({0, 2, 1}), (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(cycle_type(identity_permutation(4)), (std::vector<std::size_t>{1, 1, 1, 1}));
  EXPECT_EQ(inverse(Permutation{1, 2, 0}), (Permutation{2, 0, 1}));
}

TEST(DefaultOddDegree, FromSmallestAngle) {
  EXPECT_EQ(default_odd_degree(pillowcase()), 3u);
  // Triangle pillow: apexes of pi/2 need d > 4.
  EXPECT_EQ(default_odd_degree(build_surface(corpus::triangle_pillow())), 5u);
  // An equilateral-triangle pillow has three cones of angle 2pi/3.
  SurfaceDescription eq;
  const double h = std::sqrt(3.0) / 2;
  eq.polygons.push_back({"A", {{0, 0}, {1, 0}, {0.5, h}}});
  eq.polygons.push_back({"B", {{0, 0}, {0.5, -h}, {1, 0}}});
  eq.gluings = {{"A", 0, "B", 2}, {"A", 1, "B", 1}, {"A", 2, "B", 0}};
  EXPECT_EQ(default_odd_degree(build_surface(eq)), 5u);
  EXPECT_EQ(error_of([] { default_odd_degree(torus()); }), ErrorCode::NoSmallSingularities);
}

TEST(BuildCover, TrivialCoverIsIsometricCopy) {
  const Cover c = build_cover(torus(), {1, {}});
  EXPECT_EQ(c.surface.euler_characteristic(), 0);
  ASSERT_EQ(c.surface.vertex_classes().size(), 1u);
  EXPECT_NEAR(c.surface.vertex_class(0).angle, kTwoPi, 1e-12);
  EXPECT_EQ(riemann_hurwitz_residual(torus(), c), 0);
  const TraceResult tr = trace(torus(), {0, {0.2, 0.3}, {1, 0.37}}, 5.0);
  const TraceResult up = lift_trace(torus(), c, tr, 0);
  ASSERT_EQ(up.segments.size(), tr.segments.size());
  for (std::size_t k = 0; k < up.segments.size(); ++k) {
    EXPECT_EQ(up.segments[k].chart, tr.segments[k].chart);
    EXPECT_LE(norm(up.segments[k].end - tr.segments[k].end), 1e-12);
  }
}

TEST(BuildCover, TorusDoubleCoverIsUnbranched) {
  // Around the torus vertex each gluing is crossed once in each direction,
  // so the monodromy is trivial and the double cover has two 2pi points.
  const Cover c = build_cover(torus(), {2, {{1, {1, 0}}}});
  EXPECT_TRUE(c.report.connected);
  EXPECT_EQ(c.surface.euler_characteristic(), 0);
  EXPECT_EQ(direct_euler(c.description), 0);
  ASSERT_EQ(c.surface.vertex_classes().size(), 2u);
  for (const auto& cc : c.surface.vertex_classes()) EXPECT_NEAR(cc.angle, kTwoPi, 1e-12);
  EXPECT_EQ(c.report.base_classes[0].cycle_type, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(riemann_hurwitz_residual(torus(), c), 0);
}

TEST(BuildCover, HorizontalLiftClosesAfterTwoCircuits) {
  const Cover c = build_cover(torus(), {2, {{1, {1, 0}}}});
  TraceOptions o;
  o.detect_recurrence = true;
  const TraceResult base = trace(torus(), {0, {0.5, 0.5}, {1, 0}}, 3.0, o);
  ASSERT_TRUE(base.closed());
  EXPECT_NEAR(base.total_length, 1.0, 1e-9);
  const TraceResult up = trace(c.surface, {c.chart_index(0, 0), {0.5, 0.5}, {1, 0}}, 3.0, o);
  ASSERT_TRUE(up.closed());
  EXPECT_NEAR(up.total_length, 2.0, 1e-9);
  // The vertical direction does not cross the swapped gluing.
  const TraceResult v = trace(c.surface, {c.chart_index(0, 1), {0.5, 0.5}, {0, 1}}, 3.0, o);
  EXPECT_NEAR(v.total_length, 1.0, 1e-9);
}

TEST(BuildCover, PillowcaseTripleCover) {
  const CoverSpec spec = pillowcase_triple();
  EXPECT_EQ(spec.degree, default_odd_degree(pillowcase()));
  const Cover c = build_cover(pillowcase(), spec);
  EXPECT_TRUE(c.report.connected);
  for (const auto& b : c.report.base_classes) EXPECT_EQ(b.cycle_type, (std::vector<std::size_t>{3}));
  ASSERT_EQ(c.surface.vertex_classes().size(), 4u);
  for (const auto& cc : c.surface.vertex_classes()) {
    EXPECT_NEAR(cc.angle, 3 * kPi, 1e-9);
    EXPECT_EQ(cc.kind, VertexKind::Large);
  }
  EXPECT_EQ(c.surface.euler_characteristic(), -2);
  EXPECT_EQ(direct_euler(c.description), -2);
  EXPECT_EQ(riemann_hurwitz_residual(pillowcase(), c), 0);
  EXPECT_TRUE(validate_gauss_bonnet(c.surface).ok);
}

TEST(BuildCover, LocalDegreesPartitionTheDegree) {
  // Swap on one pillowcase gluing: a double cover branched at two corners.
  const Cover c = build_cover(pillowcase(), {2, {{0, {1, 0}}}});
  std::map<std::size_t, std::size_t> sum;
  for (const auto& cc : c.report.cover_classes) {
    sum[cc.base_class] += cc.local_degree;
    EXPECT_NEAR(cc.angle, cc.local_degree * pillowcase().vertex_class(cc.base_class).angle, 1e-9);
  }
  for (const auto& [b, n] : sum) EXPECT_EQ(n, 2u) << b;
  EXPECT_EQ(riemann_hurwitz_residual(pillowcase(), c), 0);
  EXPECT_EQ(c.surface.euler_characteristic(), direct_euler(c.description));
}

TEST(BuildCover, DisconnectedCoverIsReported) {
  const Cover c = build_cover(pillowcase(), {2, {}});
  EXPECT_FALSE(c.report.connected);
  EXPECT_EQ(c.report.components, 2u);
  EXPECT_EQ(riemann_hurwitz_residual(pillowcase(), c), 0);
}

TEST(BuildCover, InvalidPermutations) {
  EXPECT_EQ(error_of([] { build_cover(torus(), {2, {{0, {0, 0}}}}); }), ErrorCode::InvalidPermutation);
  EXPECT_EQ(error_of([] { build_cover(torus(), {2, {{0, {0, 1, 2}}}}); }), ErrorCode::InvalidPermutation);
  EXPECT_EQ(error_of([] { build_cover(torus(), {2, {{7, {1, 0}}}}); }), ErrorCode::InvalidPermutation);
  EXPECT_EQ(error_of([] { build_cover(torus(), {0, {}}); }), ErrorCode::InvalidPermutation);
}

TEST(BuildCover, UnmarkedPointsStayRegularWhenUnbranched) {
  const auto s = build_surface(corpus::flat_torus(false));
  const Cover c = build_cover(s, {2, {{0, {1, 0}}}});
  EXPECT_TRUE(c.surface.singular_classes().empty());
}

TEST(Lift, RandomSegmentsProjectToBase) {
  const Cover c = build_cover(pillowcase(), pillowcase_triple());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.02, 0.98), a(0, kTwoPi), len(0.05, 2.0);
  std::uniform_int_distribution<std::size_t> sheet(0, 2), chart(0, 1);
  int done = 0;
  while (done < 1000) {
    const std::size_t ch = chart(rng);
    const Vec2 p = ch == 0 ? Vec2{u(rng), u(rng)} : Vec2{u(rng), -u(rng)};
    const double ang = a(rng);
    const TraceResult base = trace(pillowcase(), {ch, p, {std::cos(ang), std::sin(ang)}}, len(rng));
    if (base.hit_cone()) continue;
    const TraceResult up = lift_trace(pillowcase(), c, base, sheet(rng));
    EXPECT_NEAR(up.total_length, base.total_length, 1e-9);
    ++done;
  }
}

TEST(Lift, BranchPointOnPath) {
  const Cover c = build_cover(pillowcase(), pillowcase_triple());
  const TraceResult base = trace(pillowcase(), {0, {0.5, 0.5}, {1, 1}}, 2.0);
  ASSERT_TRUE(base.hit_cone());
  EXPECT_EQ(error_of([&] { lift_trace(pillowcase(), c, base, 0); }), ErrorCode::BranchPointOnPath);
}

TEST(MonodromyJson, RoundTrip) {
  const CoverSpec spec = pillowcase_triple();
  const auto j = to_json(spec);
  const CoverSpec back = cover_spec_from_json(j, 3);
  EXPECT_EQ(back.edge_permutations, spec.edge_permutations);
  EXPECT_EQ(error_of([] { cover_spec_from_json(nlohmann::json::parse(R"({"x": [1]})"), 1); }), ErrorCode::ParseError);
}

TEST(MonodromySearch, BudgetExhaustion) {
  MonodromySearchOptions o;
  o.node_budget = 3;
  EXPECT_FALSE(search_monodromy(pillowcase(), 3, o));
}
