#include "tvesim/fem.hpp"

#include <array>
#include <stdexcept>

namespace tvesim {

namespace {

// Element blocks are computed into disjoint element-indexed storage (parallel
// safe without atomics) and inserted serially in element order, which keeps
// the assembled matrix independent of the schedule.
template <int BlockSize, typename Fn>
SpMat assemble_blocks(const Mesh& mesh, int n_dofs, int dofs_per_node, kernels::Exec exec, Fn&& fill) {
  const std::size_t ne = static_cast<std::size_t>(mesh.n_elems());
  std::vector<std::array<double, static_cast<std::size_t>(BlockSize) * BlockSize>> blocks(ne);
  if (exec == kernels::Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long e = 0; e < static_cast<long long>(ne); ++e)
      fill(static_cast<int>(e), blocks[static_cast<std::size_t>(e)].data());
  } else {
    for (std::size_t e = 0; e < ne; ++e) fill(static_cast<int>(e), blocks[e].data());
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(ne * BlockSize * BlockSize);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& t = mesh.tris[e];
    std::array<int, BlockSize> dof{};
    for (int k = 0; k < 3; ++k)
      for (int d = 0; d < dofs_per_node; ++d)
        dof[static_cast<std::size_t>(dofs_per_node * k + d)] = dofs_per_node * t[static_cast<std::size_t>(k)] + d;
    for (int a = 0; a < BlockSize; ++a)
      for (int b = 0; b < BlockSize; ++b)
        trip.emplace_back(dof[static_cast<std::size_t>(a)], dof[static_cast<std::size_t>(b)],
                          blocks[e][static_cast<std::size_t>(BlockSize * a + b)]);
  }
  SpMat m(n_dofs, n_dofs);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

SpMat stiffness_scalar(const Mesh& mesh, kernels::Exec exec) {
  return assemble_blocks<3>(mesh, mesh.n_nodes(), 1, exec, [&mesh](int e, double* blk) {
    const auto& g = mesh.grads[static_cast<std::size_t>(e)];
    const double w = mesh.area[static_cast<std::size_t>(e)];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        blk[3 * a + b] = w * (g[static_cast<std::size_t>(2 * a)] * g[static_cast<std::size_t>(2 * b)] +
                              g[static_cast<std::size_t>(2 * a + 1)] * g[static_cast<std::size_t>(2 * b + 1)]);
  });
}

SpMat mass_scalar(const Mesh& mesh, kernels::Exec exec) {
  return assemble_blocks<3>(mesh, mesh.n_nodes(), 1, exec, [&mesh](int e, double* blk) {
    const double w = mesh.area[static_cast<std::size_t>(e)] / 12.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) blk[3 * a + b] = a == b ? 2.0 * w : w;
  });
}

Eigen::VectorXd lumped_mass_scalar(const Mesh& mesh) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(mesh.n_nodes());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double w = mesh.area[static_cast<std::size_t>(e)] / 3.0;
    for (int k = 0; k < 3; ++k) m[mesh.tris[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)]] += w;
  }
  return m;
}

SpMat stiffness_elastic(const Mesh& mesh, const MaterialField& mat, const TriangleRule& rule,
                        kernels::Exec exec) {
  return assemble_blocks<6>(mesh, 2 * mesh.n_nodes(), 2, exec, [&](int e, double* blk) {
    const auto& g = mesh.grads[static_cast<std::size_t>(e)];
    // Strain of local dof (k, d): constant per element.
    std::array<SymTensor3, 6> eps{};
    for (int k = 0; k < 3; ++k) {
      const double gx = g[static_cast<std::size_t>(2 * k)];
      const double gy = g[static_cast<std::size_t>(2 * k + 1)];
      SymTensor3 ex;  // displacement in x
      ex.a = {gx, 0.0, 0.0, 0.5 * gy, 0.0, 0.0};
      SymTensor3 ey;  // displacement in y
      ey.a = {0.0, gy, 0.0, 0.5 * gx, 0.0, 0.0};
      eps[static_cast<std::size_t>(2 * k)] = ex;
      eps[static_cast<std::size_t>(2 * k + 1)] = ey;
    }
    for (int i = 0; i < 36; ++i) blk[i] = 0.0;
    const double a2 = 2.0 * mesh.area[static_cast<std::size_t>(e)];
    for (std::size_t q = 0; q < rule.n; ++q) {
      const auto& qp = rule.pts[q];
      const ElasticModuli d = mat.at(mesh, e, qp.l1, qp.l2);
      std::array<SymTensor3, 6> deps;
      for (int a = 0; a < 6; ++a) deps[static_cast<std::size_t>(a)] = d.apply(eps[static_cast<std::size_t>(a)]);
      const double w = a2 * qp.w;
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
          blk[6 * a + b] += w * ddot(deps[static_cast<std::size_t>(b)], eps[static_cast<std::size_t>(a)]);
    }
  });
}

SpMat mass_vector(const Mesh& mesh, kernels::Exec exec) {
  return assemble_blocks<6>(mesh, 2 * mesh.n_nodes(), 2, exec, [&mesh](int e, double* blk) {
    const double w = mesh.area[static_cast<std::size_t>(e)] / 12.0;
    for (int i = 0; i < 36; ++i) blk[i] = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double v = a == b ? 2.0 * w : w;
        blk[6 * (2 * a) + 2 * b] = v;
        blk[6 * (2 * a + 1) + 2 * b + 1] = v;
      }
  });
}

DofMap interior_scalar_map(const Mesh& mesh) {
  DofMap map;
  map.full_to_red.assign(static_cast<std::size_t>(mesh.n_nodes()), -1);
  for (int n = 0; n < mesh.n_nodes(); ++n)
    if (!mesh.on_boundary[static_cast<std::size_t>(n)]) {
      map.full_to_red[static_cast<std::size_t>(n)] = map.n_red++;
      map.red_to_full.push_back(n);
    }
  return map;
}

DofMap interior_vector_map(const Mesh& mesh) {
  DofMap map;
  map.full_to_red.assign(static_cast<std::size_t>(2 * mesh.n_nodes()), -1);
  for (int n = 0; n < mesh.n_nodes(); ++n)
    if (!mesh.on_boundary[static_cast<std::size_t>(n)])
      for (int d = 0; d < 2; ++d) {
        map.full_to_red[static_cast<std::size_t>(2 * n + d)] = map.n_red++;
        map.red_to_full.push_back(2 * n + d);
      }
  return map;
}

SpMat restrict_matrix(const SpMat& a, const DofMap& map) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      const int r = map.full_to_red[static_cast<std::size_t>(it.row())];
      const int c = map.full_to_red[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  SpMat red(map.n_red, map.n_red);
  red.setFromTriplets(trip.begin(), trip.end());
  return red;
}

Eigen::VectorXd restrict_vector(const Eigen::VectorXd& v, const DofMap& map) {
  Eigen::VectorXd r(map.n_red);
  for (int i = 0; i < map.n_red; ++i) r[i] = v[map.red_to_full[static_cast<std::size_t>(i)]];
  return r;
}

Eigen::VectorXd prolong_vector(const Eigen::VectorXd& v, const DofMap& map) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.full_to_red.size()));
  for (int i = 0; i < map.n_red; ++i) full[map.red_to_full[static_cast<std::size_t>(i)]] = v[i];
  return full;
}

Eigen::VectorXd load_scalar(const Mesh& mesh, const TriangleRule& rule,
                            const std::function<double(double, double)>& f) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.n_nodes());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double a2 = 2.0 * mesh.area[static_cast<std::size_t>(e)];
    const auto& t = mesh.tris[static_cast<std::size_t>(e)];
    for (std::size_t q = 0; q < rule.n; ++q) {
      const auto& qp = rule.pts[q];
      const auto x = mesh.point(e, qp.l1, qp.l2);
      const double fv = f(x[0], x[1]) * a2 * qp.w;
      const std::array<double, 3> bary = {qp.l1, qp.l2, 1.0 - qp.l1 - qp.l2};
      for (int k = 0; k < 3; ++k) b[t[static_cast<std::size_t>(k)]] += fv * bary[static_cast<std::size_t>(k)];
    }
  }
  return b;
}

Eigen::VectorXd load_vector(const Mesh& mesh, const TriangleRule& rule,
                            const std::function<std::array<double, 2>(double, double)>& f) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * mesh.n_nodes());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double a2 = 2.0 * mesh.area[static_cast<std::size_t>(e)];
    const auto& t = mesh.tris[static_cast<std::size_t>(e)];
    for (std::size_t q = 0; q < rule.n; ++q) {
      const auto& qp = rule.pts[q];
      const auto x = mesh.point(e, qp.l1, qp.l2);
      const auto fv = f(x[0], x[1]);
      const double w = a2 * qp.w;
      const std::array<double, 3> bary = {qp.l1, qp.l2, 1.0 - qp.l1 - qp.l2};
      for (int k = 0; k < 3; ++k) {
        b[2 * t[static_cast<std::size_t>(k)]] += w * bary[static_cast<std::size_t>(k)] * fv[0];
        b[2 * t[static_cast<std::size_t>(k)] + 1] += w * bary[static_cast<std::size_t>(k)] * fv[1];
      }
    }
  }
  return b;
}

Eigen::VectorXd boundary_flux_load(const Mesh& mesh, const std::function<double(double, double)>& g) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.n_nodes());
  const EdgeRule rule = edge_rule();
  for (const auto& edge : mesh.bedges) {
    const auto& p0 = mesh.nodes[static_cast<std::size_t>(edge.n0)];
    const auto& p1 = mesh.nodes[static_cast<std::size_t>(edge.n1)];
    for (int q = 0; q < 2; ++q) {
      const double s = rule.s[static_cast<std::size_t>(q)];
      const double x = (1.0 - s) * p0[0] + s * p1[0];
      const double y = (1.0 - s) * p0[1] + s * p1[1];
      const double gv = g(x, y) * rule.w[static_cast<std::size_t>(q)] * edge.length;
      b[edge.n0] += gv * (1.0 - s);
      b[edge.n1] += gv * s;
    }
  }
  return b;
}

SymTensor3 element_strain(const Mesh& mesh, int e, const Eigen::VectorXd& u) {
  const auto& g = mesh.grads[static_cast<std::size_t>(e)];
  const auto& t = mesh.tris[static_cast<std::size_t>(e)];
  double e11 = 0.0, e22 = 0.0, e12 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double ux = u[2 * t[static_cast<std::size_t>(k)]];
    const double uy = u[2 * t[static_cast<std::size_t>(k)] + 1];
    const double gx = g[static_cast<std::size_t>(2 * k)];
    const double gy = g[static_cast<std::size_t>(2 * k + 1)];
    e11 += ux * gx;
    e22 += uy * gy;
    e12 += 0.5 * (ux * gy + uy * gx);
  }
  SymTensor3 s;
  s.a = {e11, e22, 0.0, e12, 0.0, 0.0};
  return s;
}

double eval_p1(const Mesh& mesh, const Eigen::VectorXd& f, int e, double l1, double l2) {
  const auto& t = mesh.tris[static_cast<std::size_t>(e)];
  return l1 * f[t[0]] + l2 * f[t[1]] + (1.0 - l1 - l2) * f[t[2]];
}

std::array<double, 2> grad_p1(const Mesh& mesh, const Eigen::VectorXd& f, int e) {
  const auto& g = mesh.grads[static_cast<std::size_t>(e)];
  const auto& t = mesh.tris[static_cast<std::size_t>(e)];
  double gx = 0.0, gy = 0.0;
  for (int k = 0; k < 3; ++k) {
    gx += f[t[static_cast<std::size_t>(k)]] * g[static_cast<std::size_t>(2 * k)];
    gy += f[t[static_cast<std::size_t>(k)]] * g[static_cast<std::size_t>(2 * k + 1)];
  }
  return {gx, gy};
}

}  // namespace tvesim
