#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace tvesim {

// Quadrature point on the reference triangle (0,0)-(1,0)-(0,1) given by
// barycentric coordinates of the first two vertices and a weight that already
// includes the reference area 1/2.
struct TriQuadPoint {
  double l1, l2;
  double w;
};

struct TriangleRule {
  std::array<TriQuadPoint, 6> pts{};
  std::size_t n = 0;
  int degree = 0;
};

// degree 2: midpoint-of-edges rule, degree 4: six point rule.
inline TriangleRule triangle_rule(int degree) {
  TriangleRule r;
  if (degree <= 2) {
    r.degree = 2;
    r.n = 3;
    const double w = 1.0 / 6.0;
    r.pts[0] = {0.5, 0.5, w};
    r.pts[1] = {0.0, 0.5, w};
    r.pts[2] = {0.5, 0.0, w};
    return r;
  }
  if (degree <= 4) {
    r.degree = 4;
    r.n = 6;
    const double a1 = 0.445948490915965;
    const double w1 = 0.223381589678011 * 0.5;
    const double a2 = 0.091576213509771;
    const double w2 = 0.109951743655322 * 0.5;
    r.pts[0] = {a1, a1, w1};
    r.pts[1] = {1.0 - 2.0 * a1, a1, w1};
    r.pts[2] = {a1, 1.0 - 2.0 * a1, w1};
    r.pts[3] = {a2, a2, w2};
    r.pts[4] = {1.0 - 2.0 * a2, a2, w2};
    r.pts[5] = {a2, 1.0 - 2.0 * a2, w2};
    return r;
  }
  throw std::invalid_argument("triangle_rule: supported degrees are 2 and 4");
}

// Two point Gauss rule on [0,1], exact through degree 3.
struct EdgeRule {
  std::array<double, 2> s;
  std::array<double, 2> w;
};

inline EdgeRule edge_rule() {
  EdgeRule r;
  const double d = 0.5 / std::sqrt(3.0);
  r.s = {0.5 - d, 0.5 + d};
  r.w = {0.5, 0.5};
  return r;
}

}  // namespace tvesim
