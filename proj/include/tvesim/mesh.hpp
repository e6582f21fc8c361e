#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "tvesim/quadrature.hpp"

namespace tvesim {

// Boundary side tags; together the four sides partition the boundary.
enum BoundaryTag : int { kLeft = 0, kRight = 1, kBottom = 2, kTop = 3 };

struct BoundaryEdge {
  int n0, n1;
  int tag;
  double length;
};

// Structured triangulation of the rectangle (0,lx) x (0,ly): nx*ny cells,
// each split along the lower-left to upper-right diagonal into two right
// triangles (all angles <= 90 degrees). Node (i,j) has index j*(nx+1)+i.
struct Mesh {
  double lx = 1.0, ly = 1.0;
  int nx = 1, ny = 1;

  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<int, 3>> tris;  // CCW vertex indices
  std::vector<double> area;
  // Constant P1 basis gradients per element: grads[e][2*k+d] = d phi_k / d x_d.
  std::vector<std::array<double, 6>> grads;
  std::vector<BoundaryEdge> bedges;
  std::vector<char> on_boundary;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_elems() const { return static_cast<int>(tris.size()); }

  std::array<double, 2> point(int e, double l1, double l2) const {
    const auto& t = tris[static_cast<std::size_t>(e)];
    const double l3 = 1.0 - l1 - l2;
    const auto& a = nodes[static_cast<std::size_t>(t[0])];
    const auto& b = nodes[static_cast<std::size_t>(t[1])];
    const auto& c = nodes[static_cast<std::size_t>(t[2])];
    return {l1 * a[0] + l2 * b[0] + l3 * c[0], l1 * a[1] + l2 * b[1] + l3 * c[1]};
  }

  std::array<double, 2> centroid(int e) const {
    const double third = 1.0 / 3.0;
    return point(e, third, third);
  }
};

Mesh build_mesh(double lx, double ly, int nx, int ny);

}  // namespace tvesim
