#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "conesurf/corpus.hpp"
#include "conesurf/cylinders.hpp"
#include "oracles.hpp"

using namespace conesurf;

namespace {

const ConeSurface& torus() {
  static const ConeSurface s = build_surface(corpus::flat_torus(true));
  return s;
}
const ConeSurface& octagon() {
  static const ConeSurface s = build_surface(corpus::regular_octagon());
  return s;
}

const double kPhi = (1 + std::sqrt(5.0)) / 2;

bool recloses(const ConeSurface& s, const GeodesicState& st, double circumference) {
  TraceOptions o;
  o.detect_recurrence = true;
  o.record_min_distance = false;
  const TraceResult tr = trace(s, st, circumference * 1.5, o);
  return tr.closed() && std::abs(tr.total_length - circumference) <= s.tolerances().rec;
}

// Integral over [-W, W] of the distance between two unit-speed lines through
// a common point at angle alpha, weighted by e^{-|t|}.
double crossing_lines_distance(double alpha, double W) {
  return 4 * std::sin(alpha / 2) * (1 - (1 + W) * std::exp(-W));
}

}  // namespace

TEST(StripQuadrangle, SpotValues) {
  const auto q = strip_quadrangle(1, 2, kPi / 6);
  EXPECT_NEAR(q.length, 1.0, 1e-12);
  EXPECT_NEAR(q.width, 2 + 1 / std::sqrt(3.0), 1e-12);
  const auto r = strip_quadrangle(1, 1, kPi / 4);
  EXPECT_NEAR(r.length, 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.width, 1 + 1 / std::sqrt(2.0), 1e-12);
}

TEST(StripQuadrangle, ShallowAngleIsLong) {
  const auto q = strip_quadrangle(0.5, 1.0, 1e-6);
  EXPECT_GT(q.length, 1e5);
  EXPECT_GE(q.width, 1.0 + 0.25);
}

TEST(StripQuadrangle, DomainErrors) {
  for (auto [e, d, t] : {std::tuple{0.0, 1.0, 0.5}, {2.0, 1.0, 0.5}, {1.0, 1.0, 0.0}, {1.0, 1.0, kPi / 2}}) {
    try {
      strip_quadrangle(e, d, t);
      FAIL();
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::DomainError);
    }
  }
}

TEST(StripQuadrangle, WidthExceedsDeltaPlusHalfEps) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-3, 10.0), th(1e-6, kPi / 2 - 1e-6);
  for (int i = 0; i < 10000; ++i) {
    double e = u(rng), d = u(rng);
    if (e > d) std::swap(e, d);
    const auto q = strip_quadrangle(e, d, th(rng));
    EXPECT_GT(q.width, d + e / 2);
  }
}

TEST(ClosedGeodesic, TorusAxisAndDiagonal) {
  const auto h = find_closed_geodesic(torus(), 0, {1, 0});
  ASSERT_TRUE(h);
  EXPECT_NEAR(h->circumference, 1.0, 1e-9);
  EXPECT_NEAR(*h->width_left, 0.5, 1e-9);
  EXPECT_NEAR(*h->width_right, 0.5, 1e-9);
  const auto d = find_closed_geodesic(torus(), 0, {1, 1});
  ASSERT_TRUE(d);
  EXPECT_NEAR(d->circumference, std::sqrt(2.0), 1e-9);
}

TEST(ClosedGeodesic, GoldenSlopeNotFound) {
  EXPECT_FALSE(find_closed_geodesic(torus(), 0, {1, kPhi}));
}

TEST(ClosedGeodesic, FromSaddle) {
  for (const auto& sc : enumerate_saddles(torus(), 0, 3.0)) {
    const auto c = find_closed_geodesic(torus(), sc);
    ASSERT_TRUE(c);
    EXPECT_NEAR(c->circumference, sc.length, 1e-9);
    EXPECT_NEAR(*c->width_left + *c->width_right, 1 / sc.length, 1e-9);
  }
}

TEST(StripWidth, OffCentreCoreAgainstLattice) {
  ClosedSearchOptions o;
  o.hint = Vec2{0.5, 0.3};
  o.recentre = false;
  const auto c = find_closed_geodesic(torus(), 0, {1, 0}, o);
  ASSERT_TRUE(c);
  EXPECT_NEAR(*c->width_left, 0.7, 1e-12);
  EXPECT_NEAR(*c->width_right, 0.3, 1e-12);
  ASSERT_EQ(c->left_boundary.size(), 1u);
  EXPECT_NEAR(c->left_boundary[0].t, 0.5, 1e-12);
}

TEST(StripWidth, TorusCylindersMatchLattice) {
  for (long p = -5; p <= 5; ++p) {
    for (long q = -5; q <= 5; ++q) {
      if (p * p + q * q > 25 || std::gcd(p, q) != 1) continue;
      const double r = std::hypot(p, q);
      const auto c = find_closed_geodesic(torus(), 0, {double(p), double(q)});
      ASSERT_TRUE(c) << p << "," << q;
      EXPECT_NEAR(c->circumference, r, 1e-9);
      const auto [l, rr] = oracle::lattice_strip(c->core.start.point, c->core.start.direction);
      EXPECT_NEAR(*c->width_left, l, 1e-9) << p << "," << q;
      EXPECT_NEAR(*c->width_right, rr, 1e-9) << p << "," << q;
      EXPECT_NEAR(*c->width_left + *c->width_right, 1 / r, 1e-9);
      EXPECT_NEAR(*c->width_left, 0.5 / r, 1e-9);
    }
  }
}

TEST(StripWidth, UnmarkedTorusIsUnbounded) {
  const auto s = build_surface(corpus::flat_torus(false));
  for (const Vec2 dir : {Vec2{1, 0}, Vec2{2, 1}}) {
    ClosedSearchOptions o;
    o.strip.cap_factor = 20;
    const auto c = find_closed_geodesic(s, 0, dir, o);
    ASSERT_TRUE(c);
    EXPECT_FALSE(c->width_left);
    EXPECT_FALSE(c->width_right);
  }
  // The default cap.
  const auto c = find_closed_geodesic(s, 0, {1, 0});
  ASSERT_TRUE(c);
  EXPECT_FALSE(c->width_left);
}

TEST(StripWidth, OctagonHorizontalCylinder) {
  ClosedSearchOptions o;
  o.hint = Vec2{0, 0};
  o.recentre = false;
  const auto c = find_closed_geodesic(octagon(), 0, {1, 0}, o);
  ASSERT_TRUE(c);
  EXPECT_NEAR(c->circumference, 2 * std::cos(kPi / 8), 1e-9);
  EXPECT_NEAR(*c->width_left, std::sin(kPi / 8), 1e-9);
  EXPECT_NEAR(*c->width_right, std::sin(kPi / 8), 1e-9);
  // Independent unfolding along the core, several periods long.
  const auto cor = oracle::corridor(octagon(), 0, {0, 0}, {1, 0}, 5 * c->circumference);
  EXPECT_NEAR(static_cast<double>(cor.min_singular_distance), *c->width_left, 1e-9);
}

TEST(StripWidth, OffsetCoresReclose) {
  std::vector<std::pair<const ConeSurface*, Cylinder>> cyls;
  for (const Vec2 dir : {Vec2{1, 0}, Vec2{1, 2}, Vec2{3, -1}})
    cyls.emplace_back(&torus(), *find_closed_geodesic(torus(), 0, dir));
  for (const auto& sc : enumerate_saddles(octagon(), 0, 3.0))
    if (auto c = find_closed_geodesic(octagon(), sc)) cyls.emplace_back(&octagon(), *c);
  ASSERT_GT(cyls.size(), 5u);
  for (const auto& [s, c] : cyls) {
    ASSERT_TRUE(c.width_left && c.width_right);
    for (const double f : {0.25, 0.5, 0.75}) {
      EXPECT_TRUE(recloses(*s, offset_state(*s, c.core.start, f * *c.width_left), c.circumference));
      EXPECT_TRUE(recloses(*s, offset_state(*s, c.core.start, -f * *c.width_right), c.circumference));
    }
  }
}

TEST(StripWidth, NotClosedRejected) {
  const TraceResult tr = trace(torus(), {0, {0.5, 0.5}, {1, kPhi}}, 3.0);
  try {
    strip_width(torus(), tr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotClosed);
  }
}

TEST(Density, GoldenTargetOnTorus) {
  const std::vector<double> L = {1.5, 2.3, 3.7, 5.9, 9.5};
  const auto rep = density_experiment(torus(), {0, {0.5, 0.5}, {1, kPhi}}, L);
  ASSERT_EQ(rep.steps.size(), L.size());
  EXPECT_TRUE(rep.strictly_decreasing);
  EXPECT_TRUE(rep.pass);
  EXPECT_LT(rep.final_value, 0.05);
  EXPECT_FALSE(rep.target_closed);
  // Each step is won by the Fibonacci convergent q/p of the slope.
  const std::pair<int, int> conv[] = {{1, 1}, {1, 2}, {2, 3}, {3, 5}, {5, 8}};
  const double target = std::atan(kPhi);
  for (std::size_t i = 0; i < L.size(); ++i) {
    const auto [p, q] = conv[i];
    const double alpha = std::abs(std::atan2(double(q), double(p)) - target);
    EXPECT_NEAR(rep.steps[i].distance, crossing_lines_distance(alpha, 5.0), 1e-6) << i;
    ASSERT_TRUE(rep.steps[i].best);
    EXPECT_EQ(rep.steps[i].best->kind, "closed_geodesic");
    EXPECT_NEAR(rep.steps[i].best->circumference, std::hypot(p, q), 1e-9);
  }
}

TEST(Density, ClosedTargetReachesZero) {
  const auto rep = density_experiment(torus(), {0, {0.5, 0.3}, {1, 0}}, {0.5, 1.5});
  EXPECT_TRUE(rep.target_closed);
  EXPECT_TRUE(std::isinf(rep.steps[0].distance));
  EXPECT_NEAR(rep.steps[1].distance, 0.0, 1e-12);
}

TEST(Density, PillowcaseUsesChains) {
  const auto s = build_surface(corpus::pillowcase());
  const auto rep = density_experiment(s, {0, {0.5, 0.5}, {1, kPhi}}, {2.0, 4.0, 6.0});
  EXPECT_TRUE(rep.non_increasing);
  for (const auto& st : rep.steps) {
    ASSERT_TRUE(st.best);
    EXPECT_GT(st.candidates, 0u);
  }
  EXPECT_LT(rep.final_value, rep.steps.front().distance);
}

TEST(Density, RejectsBadSchedules) {
  EXPECT_THROW(density_experiment(torus(), {0, {0.5, 0.5}, {1, kPhi}}, {}), Error);
  EXPECT_THROW(density_experiment(torus(), {0, {0.5, 0.5}, {1, kPhi}}, {2.0, 1.0}), Error);
}
