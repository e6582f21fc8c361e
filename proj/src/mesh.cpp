#include "tvesim/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace tvesim {

Mesh build_mesh(double lx, double ly, int nx, int ny) {
  if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("build_mesh: side lengths must be positive");
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_mesh: subdivision counts must be >= 1");

  Mesh m;
  m.lx = lx;
  m.ly = ly;
  m.nx = nx;
  m.ny = ny;

  const int nxp = nx + 1;
  const int nyp = ny + 1;
  m.nodes.resize(static_cast<std::size_t>(nxp) * nyp);
  m.on_boundary.assign(m.nodes.size(), 0);
  const double hx = lx / nx;
  const double hy = ly / ny;
  for (int j = 0; j < nyp; ++j) {
    for (int i = 0; i < nxp; ++i) {
      const std::size_t id = static_cast<std::size_t>(j) * nxp + i;
      m.nodes[id] = {i * hx, j * hy};
      if (i == 0 || i == nx || j == 0 || j == ny) m.on_boundary[id] = 1;
    }
  }

  m.tris.reserve(static_cast<std::size_t>(2) * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int n00 = j * nxp + i;
      const int n10 = n00 + 1;
      const int n01 = n00 + nxp;
      const int n11 = n01 + 1;
      m.tris.push_back({n00, n10, n11});
      m.tris.push_back({n00, n11, n01});
    }
  }

  m.area.resize(m.tris.size());
  m.grads.resize(m.tris.size());
  for (std::size_t e = 0; e < m.tris.size(); ++e) {
    const auto& t = m.tris[e];
    const auto& a = m.nodes[static_cast<std::size_t>(t[0])];
    const auto& b = m.nodes[static_cast<std::size_t>(t[1])];
    const auto& c = m.nodes[static_cast<std::size_t>(t[2])];
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    m.area[e] = 0.5 * det;
    if (!(m.area[e] > 0.0)) throw std::runtime_error("build_mesh: degenerate element");
    // grad phi_k is perpendicular to the opposite edge, scaled by 1/(2 area).
    const double inv = 1.0 / det;
    m.grads[e] = {(b[1] - c[1]) * inv, (c[0] - b[0]) * inv,
                  (c[1] - a[1]) * inv, (a[0] - c[0]) * inv,
                  (a[1] - b[1]) * inv, (b[0] - a[0]) * inv};
  }

  auto push_edge = [&m](int n0, int n1, int tag) {
    const auto& a = m.nodes[static_cast<std::size_t>(n0)];
    const auto& b = m.nodes[static_cast<std::size_t>(n1)];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    m.bedges.push_back({n0, n1, tag, len});
  };
  for (int j = 0; j < ny; ++j) {
    push_edge(j * nxp, (j + 1) * nxp, kLeft);
    push_edge(j * nxp + nx, (j + 1) * nxp + nx, kRight);
  }
  for (int i = 0; i < nx; ++i) {
    push_edge(i, i + 1, kBottom);
    push_edge(ny * nxp + i, ny * nxp + i + 1, kTop);
  }

  return m;
}

}  // namespace tvesim
