// Hand-built example surfaces. The JSON files under data/ hold the same
// surfaces; tests check that the two agree.
#pragma once

#include <cmath>

#include "conesurf/surface.hpp"

namespace conesurf::corpus {

/// Unit square with opposite edges glued. With `marked` the corner is a
/// marked point of angle 2pi, otherwise it is an ordinary point.
inline SurfaceDescription flat_torus(bool marked) {
  SurfaceDescription d;
  d.polygons.push_back({"T", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
  d.gluings.push_back({"T", 0, "T", 2});
  d.gluings.push_back({"T", 1, "T", 3});
  if (!marked) d.unmarked.push_back({"T", 0});
  return d;
}

/// Regular octagon of circumradius 1 with a horizontal top edge; opposite
/// edges glued by translation. One vertex class of angle 6pi, genus 2.
inline SurfaceDescription regular_octagon(double circumradius = 1.0) {
  SurfaceDescription d;
  PolygonChart p{"O", {}};
  for (int k = 0; k < 8; ++k) {
    const double a = kPi / 8 + k * kPi / 4;
    p.vertices.push_back({circumradius * std::cos(a), circumradius * std::sin(a)});
  }
  d.polygons.push_back(p);
  for (std::size_t k = 0; k < 4; ++k) d.gluings.push_back({"O", k, "O", k + 4});
  return d;
}

/// Two unit squares glued along their whole boundary: a sphere with four
/// cone points of angle pi. Square B is the mirror image of A in y = 0.
inline SurfaceDescription pillowcase() {
  SurfaceDescription d;
  d.polygons.push_back({"A", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
  d.polygons.push_back({"B", {{0, -1}, {1, -1}, {1, 0}, {0, 0}}});
  d.gluings.push_back({"A", 0, "B", 2});
  d.gluings.push_back({"A", 1, "B", 1});
  d.gluings.push_back({"A", 2, "B", 0});
  d.gluings.push_back({"A", 3, "B", 3});
  return d;
}

/// Double of the right isosceles triangle (0,0),(leg,0),(leg,leg): a sphere
/// with cone angles pi/2 (origin), pi (right angle) and pi/2.
inline SurfaceDescription triangle_pillow(double leg = 10.0) {
  SurfaceDescription d;
  d.polygons.push_back({"A", {{0, 0}, {leg, 0}, {leg, leg}}});
  d.polygons.push_back({"B", {{0, 0}, {leg, -leg}, {leg, 0}}});
  d.gluings.push_back({"A", 0, "B", 2});
  d.gluings.push_back({"A", 1, "B", 1});
  d.gluings.push_back({"A", 2, "B", 0});
  return d;
}

}  // namespace conesurf::corpus
