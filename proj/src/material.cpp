#include "tvesim/material.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tvesim {

double moduli_min_eigenvalue(const ElasticModuli& m) {
  if (m.isotropic_form()) {
    // Isotropic spectrum on symmetric tensors: 3 lambda + 2 mu on the
    // spherical part, 2 mu on the deviatoric part.
    return std::min(3.0 * m.lambda() + 2.0 * m.mu(), 2.0 * m.mu());
  }
  // xi : D xi = (W xi)^T C (W xi) with W = diag(1,1,1,2,2,2); the metric
  // eigenproblem is W^{1/2} C W^{1/2}.
  Eigen::Matrix<double, 6, 6> a;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double wi = i < 3 ? 1.0 : std::sqrt(2.0);
      const double wj = j < 3 ? 1.0 : std::sqrt(2.0);
      a(i, j) = wi * m.c(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * wj;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(a);
  return es.eigenvalues().minCoeff();
}

MaterialField MaterialField::constant_isotropic(double lambda, double mu) {
  MaterialField f;
  f.kind_ = Kind::const_iso;
  f.lambda0_ = lambda;
  f.mu0_ = mu;
  f.validate();
  return f;
}

MaterialField MaterialField::isotropic_nodal(std::vector<double> lambda, std::vector<double> mu) {
  if (lambda.size() != mu.size())
    throw std::invalid_argument("MaterialField: lambda/mu nodal arrays differ in size");
  MaterialField f;
  f.kind_ = Kind::nodal_iso;
  f.lambda_ = std::move(lambda);
  f.mu_ = std::move(mu);
  f.validate();
  return f;
}

MaterialField MaterialField::anisotropic_nodal(std::vector<std::array<double, 36>> c, double sym_tol) {
  for (const auto& node : c) {
    double scale = 0.0;
    for (double v : node) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j)
        if (std::abs(node[static_cast<std::size_t>(6 * i + j)] -
                     node[static_cast<std::size_t>(6 * j + i)]) > sym_tol * std::max(1.0, scale))
          throw std::invalid_argument("MaterialField: anisotropic moduli not symmetric");
  }
  MaterialField f;
  f.kind_ = Kind::nodal_aniso;
  f.c_ = std::move(c);
  f.validate();
  return f;
}

void MaterialField::validate() {
  double dmin = std::numeric_limits<double>::infinity();
  switch (kind_) {
    case Kind::const_iso:
      dmin = moduli_min_eigenvalue(ElasticModuli::isotropic(lambda0_, mu0_));
      break;
    case Kind::nodal_iso:
      for (std::size_t i = 0; i < lambda_.size(); ++i)
        dmin = std::min(dmin, moduli_min_eigenvalue(ElasticModuli::isotropic(lambda_[i], mu_[i])));
      break;
    case Kind::nodal_aniso:
      for (const auto& node : c_)
        dmin = std::min(dmin, moduli_min_eigenvalue(ElasticModuli::anisotropic(node)));
      break;
  }
  if (!(dmin > 0.0)) throw std::invalid_argument("MaterialField: moduli not positive definite");
  dmin_ = dmin;
}

ElasticModuli MaterialField::at(const Mesh& mesh, int e, double l1, double l2) const {
  if (kind_ == Kind::const_iso) return ElasticModuli::isotropic(lambda0_, mu0_);
  const auto& t = mesh.tris[static_cast<std::size_t>(e)];
  const double l3 = 1.0 - l1 - l2;
  const std::array<double, 3> w = {l1, l2, l3};
  if (kind_ == Kind::nodal_iso) {
    double lam = 0.0, mu = 0.0;
    for (int k = 0; k < 3; ++k) {
      lam += w[static_cast<std::size_t>(k)] * lambda_[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])];
      mu += w[static_cast<std::size_t>(k)] * mu_[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])];
    }
    return ElasticModuli::isotropic(lam, mu);
  }
  std::array<double, 36> c{};
  for (int k = 0; k < 3; ++k) {
    const auto& node = c_[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])];
    for (std::size_t i = 0; i < 36; ++i) c[i] += w[static_cast<std::size_t>(k)] * node[i];
  }
  return ElasticModuli::anisotropic(c);
}

}  // namespace tvesim
