#include "tvesim/bases.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tvesim {

namespace {

// Fix the sign of each eigenvector: the entry of largest magnitude (first
// such index on ties) is made positive, so rebuilt bases are reproducible.
void fix_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double m = std::abs(v(i, j));
      if (m > best + 1e-300 && m > best * (1.0 + 1e-12)) {
        best = m;
        arg = i;
      }
    }
    if (v(arg, j) < 0.0) v.col(j) = -v.col(j);
  }
}

}  // namespace

std::vector<ElasticModuli> integrated_moduli(const Mesh& mesh, const MaterialField& mat,
                                             const TriangleRule& rule) {
  std::vector<ElasticModuli> dint;
  dint.reserve(static_cast<std::size_t>(mesh.n_elems()));
  for (int e = 0; e < mesh.n_elems(); ++e) {
    std::array<double, 36> acc{};
    const double a2 = 2.0 * mesh.area[static_cast<std::size_t>(e)];
    for (std::size_t q = 0; q < rule.n; ++q) {
      const auto& qp = rule.pts[q];
      const auto c = mat.at(mesh, e, qp.l1, qp.l2).component_matrix();
      const double w = a2 * qp.w;
      for (std::size_t i = 0; i < 36; ++i) acc[i] += w * c[i];
    }
    dint.push_back(ElasticModuli::anisotropic(acc));
  }
  return dint;
}

double d_inner(const std::vector<ElasticModuli>& dint, const std::vector<SymTensor3>& a,
               const std::vector<SymTensor3>& b) {
  if (a.size() != dint.size() || b.size() != dint.size())
    throw std::invalid_argument("d_inner: field size does not match the moduli table");
  double s = 0.0;
  for (std::size_t e = 0; e < dint.size(); ++e) s += ddot(dint[e].apply(a[e]), b[e]);
  return s;
}

TempBasis neumann_eigenbasis(const Mesh& mesh, int count, const EigenOptions& opt) {
  if (count < 1 || count > mesh.n_nodes())
    throw std::invalid_argument("neumann_eigenbasis: mode count out of range");
  const SpMat k = stiffness_scalar(mesh);
  const SpMat m = mass_scalar(mesh);
  EigenPairs pairs = smallest_eigenpairs(k, m, count, opt);
  fix_signs(pairs.vectors);
  TempBasis basis;
  basis.v = pairs.vectors;
  basis.mu = pairs.values;
  // clamp the numerically-zero first eigenvalue of the pure Neumann operator
  if (std::abs(basis.mu[0]) < 1e-8) basis.mu[0] = 0.0;
  return basis;
}

DispBasis elastostatic_eigenbasis(const Mesh& mesh, const MaterialField& mat,
                                  const TriangleRule& rule, int count, const EigenOptions& opt) {
  const DofMap map = interior_vector_map(mesh);
  if (count < 1 || count > map.n_red)
    throw std::invalid_argument("elastostatic_eigenbasis: mode count out of range");
  const SpMat k = restrict_matrix(stiffness_elastic(mesh, mat, rule), map);
  const SpMat m = restrict_matrix(mass_vector(mesh), map);
  EigenPairs pairs = smallest_eigenpairs(k, m, count, opt);
  fix_signs(pairs.vectors);

  DispBasis basis;
  basis.lambda = pairs.values;
  basis.w.resize(2 * mesh.n_nodes(), count);
  basis.strain.resize(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const Eigen::VectorXd full = prolong_vector(pairs.vectors.col(j), map);
    basis.w.col(j) = full;
    auto& se = basis.strain[static_cast<std::size_t>(j)];
    se.resize(static_cast<std::size_t>(mesh.n_elems()));
    for (int e = 0; e < mesh.n_elems(); ++e) se[static_cast<std::size_t>(e)] = element_strain(mesh, e, full);
  }
  return basis;
}

ComplementBasis complement_basis(const Mesh& mesh, const std::vector<ElasticModuli>& dint,
                                 const DispBasis& disp, int count) {
  const int ne = mesh.n_elems();
  const int dim = 6 * ne;
  const int k = disp.count();
  if (count < 0 || count > dim - k)
    throw std::invalid_argument("complement_basis: requested count exceeds the complement dimension");

  // D-orthonormalized displacement strains
  std::vector<std::vector<SymTensor3>> ehat(static_cast<std::size_t>(k));
  for (int n = 0; n < k; ++n) {
    ehat[static_cast<std::size_t>(n)] = disp.strain[static_cast<std::size_t>(n)];
    const double inv = 1.0 / std::sqrt(disp.lambda[n]);
    for (auto& t : ehat[static_cast<std::size_t>(n)]) t *= inv;
  }

  // candidate (element, slot) indicators ordered by descending residual norm
  auto indicator_inner = [&](int e, int slot, const std::vector<SymTensor3>& b) {
    SymTensor3 unit;
    unit[static_cast<std::size_t>(slot)] = 1.0;
    return ddot(dint[static_cast<std::size_t>(e)].apply(unit), b[static_cast<std::size_t>(e)]);
  };
  auto indicator_self = [&](int e, int slot) {
    SymTensor3 unit;
    unit[static_cast<std::size_t>(slot)] = 1.0;
    return ddot(dint[static_cast<std::size_t>(e)].apply(unit), unit);
  };

  std::vector<double> residual(static_cast<std::size_t>(dim));
  for (int c = 0; c < dim; ++c) {
    const int e = c / 6;
    const int slot = c % 6;
    double r2 = indicator_self(e, slot);
    for (int n = 0; n < k; ++n) {
      const double proj = indicator_inner(e, slot, ehat[static_cast<std::size_t>(n)]);
      r2 -= proj * proj;
    }
    residual[static_cast<std::size_t>(c)] = r2;
  }
  std::vector<int> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return residual[static_cast<std::size_t>(a)] > residual[static_cast<std::size_t>(b)];
  });

  ComplementBasis comp;
  comp.zeta.reserve(static_cast<std::size_t>(count));
  const double drop_tol = 1e-8;

  for (int c : order) {
    if (comp.count() == count) break;
    const int e = c / 6;
    const int slot = c % 6;
    std::vector<SymTensor3> v(static_cast<std::size_t>(ne));
    v[static_cast<std::size_t>(e)][static_cast<std::size_t>(slot)] = 1.0;
    const double norm0 = std::sqrt(d_inner(dint, v, v));

    // two Gram-Schmidt passes against the strain span and accepted modes
    for (int pass = 0; pass < 2; ++pass) {
      for (int n = 0; n < k; ++n) {
        const double p = d_inner(dint, v, ehat[static_cast<std::size_t>(n)]);
        for (std::size_t i = 0; i < v.size(); ++i)
          v[i] -= p * ehat[static_cast<std::size_t>(n)][i];
      }
      for (const auto& z : comp.zeta) {
        const double p = d_inner(dint, v, z);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * z[i];
      }
    }

    const double norm = std::sqrt(std::max(0.0, d_inner(dint, v, v)));
    if (norm <= drop_tol * norm0) continue;  // numerically inside the span
    const double inv = 1.0 / norm;
    for (auto& t : v) t *= inv;
    comp.zeta.push_back(std::move(v));
  }

  if (comp.count() != count)
    throw std::runtime_error("complement_basis: candidate sweep exhausted before reaching the count");
  return comp;
}

StrainProjection project_strain(const Mesh& mesh, const MaterialField& mat, const TriangleRule& rule,
                                const DispBasis& disp, const ComplementBasis& comp,
                                const QpTensorFn& field) {
  const int k = disp.count();
  const int l = comp.count();
  StrainProjection proj;
  proj.gamma = Eigen::VectorXd::Zero(k);
  proj.delta = Eigen::VectorXd::Zero(l);
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double a2 = 2.0 * mesh.area[static_cast<std::size_t>(e)];
    for (std::size_t q = 0; q < rule.n; ++q) {
      const auto& qp = rule.pts[q];
      const auto x = mesh.point(e, qp.l1, qp.l2);
      const SymTensor3 dval =
          mat.at(mesh, e, qp.l1, qp.l2).apply(field(e, static_cast<int>(q), x[0], x[1]));
      const double w = a2 * qp.w;
      for (int n = 0; n < k; ++n)
        proj.gamma[n] += w * ddot(dval, disp.strain[static_cast<std::size_t>(n)][static_cast<std::size_t>(e)]);
      for (int m = 0; m < l; ++m)
        proj.delta[m] += w * ddot(dval, comp.zeta[static_cast<std::size_t>(m)][static_cast<std::size_t>(e)]);
    }
  }
  for (int n = 0; n < k; ++n) proj.gamma[n] /= disp.lambda[n];
  return proj;
}

Eigen::VectorXd project_temperature(const Mesh& mesh, const TempBasis& temp,
                                    const Eigen::VectorXd& nodal) {
  const SpMat m = mass_scalar(mesh);
  return temp.v.transpose() * (m * nodal);
}

}  // namespace tvesim
