#include <doctest.h>

#include <cmath>
#include <random>

#include "tvesim/bases.hpp"

using namespace tvesim;

namespace {

constexpr double kPi = 3.14159265358979323846;

double mass_inner(const SpMat& m, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(m * b);
}

}  // namespace

TEST_CASE("neumann eigenbasis matches the separable spectrum") {
  const Mesh mesh = build_mesh(1.0, 1.0, 16, 16);
  const TempBasis basis = neumann_eigenbasis(mesh, 6);

  CHECK(basis.mu[0] == 0.0);
  // constant first mode, normalized to one on the unit square
  const double v0 = basis.v(0, 0);
  CHECK(v0 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK((basis.v.col(0).array() - v0).abs().maxCoeff() <= 1e-8);

  // continuum values pi^2 (i^2 + j^2): pi^2, pi^2, 2 pi^2, 4 pi^2, 4 pi^2
  const std::array<double, 5> exact = {kPi * kPi, kPi * kPi, 2 * kPi * kPi, 4 * kPi * kPi,
                                       4 * kPi * kPi};
  for (int i = 0; i < 5; ++i)
    CHECK(basis.mu[i + 1] == doctest::Approx(exact[static_cast<std::size_t>(i)]).epsilon(0.03));

  // discrete eigenvalues sit above the continuum ones for conforming P1
  for (int i = 0; i < 5; ++i) CHECK(basis.mu[i + 1] >= exact[static_cast<std::size_t>(i)] - 1e-9);

  // L2 Gram identity
  const SpMat m = mass_scalar(mesh);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const double expect = i == j ? 1.0 : 0.0;
      CHECK(std::abs(mass_inner(m, basis.v.col(i), basis.v.col(j)) - expect) <= 1e-8);
    }
}

TEST_CASE("eigenvalue convergence rate under mesh refinement") {
  // second Neumann eigenvalue, errors on h and h/2 give a rate near 2
  const double exact = kPi * kPi;
  double err[2];
  int idx = 0;
  for (int n : {8, 16}) {
    const Mesh mesh = build_mesh(1.0, 1.0, n, n);
    const TempBasis basis = neumann_eigenbasis(mesh, 3);
    err[idx++] = std::abs(basis.mu[1] - exact);
  }
  const double rate = std::log(err[0] / err[1]) / std::log(2.0);
  CHECK(rate == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("elastostatic eigenbasis gram identities") {
  const Mesh mesh = build_mesh(1.0, 1.0, 8, 8);
  const MaterialField mat = MaterialField::constant_isotropic(1.0, 1.0);
  const TriangleRule rule = triangle_rule(4);
  const DispBasis basis = elastostatic_eigenbasis(mesh, mat, rule, 5);

  for (int i = 0; i < 5; ++i) CHECK(basis.lambda[i] > 0.0);
  for (int i = 0; i + 1 < 5; ++i) CHECK(basis.lambda[i] <= basis.lambda[i + 1] * (1.0 + 1e-12));

  // boundary dofs vanish
  for (int n = 0; n < mesh.n_nodes(); ++n)
    if (mesh.on_boundary[static_cast<std::size_t>(n)]) {
      CHECK(basis.w(2 * n, 0) == 0.0);
      CHECK(basis.w(2 * n + 1, 0) == 0.0);
    }

  const SpMat m = mass_vector(mesh);
  const auto dint = integrated_moduli(mesh, mat, rule);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double expect_m = i == j ? 1.0 : 0.0;
      CHECK(std::abs(basis.w.col(i).dot(m * basis.w.col(j)) - expect_m) <= 1e-8);
      const double expect_d = i == j ? basis.lambda[i] : 0.0;
      const double got = d_inner(dint, basis.strain[static_cast<std::size_t>(i)],
                                 basis.strain[static_cast<std::size_t>(j)]);
      CHECK(std::abs(got - expect_d) <= 1e-8 * std::max(1.0, basis.lambda[i]));
    }
}

TEST_CASE("complement basis is d-orthonormal and orthogonal to strains") {
  const Mesh mesh = build_mesh(1.0, 1.0, 4, 4);
  const MaterialField mat = MaterialField::constant_isotropic(1.2, 0.8);
  const TriangleRule rule = triangle_rule(4);
  const auto dint = integrated_moduli(mesh, mat, rule);
  const DispBasis disp = elastostatic_eigenbasis(mesh, mat, rule, 4);
  const ComplementBasis comp = complement_basis(mesh, dint, disp, 6);

  REQUIRE(comp.count() == 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double expect = i == j ? 1.0 : 0.0;
      CHECK(std::abs(d_inner(dint, comp.zeta[static_cast<std::size_t>(i)],
                             comp.zeta[static_cast<std::size_t>(j)]) -
                     expect) <= 1e-8);
    }
    for (int n = 0; n < 4; ++n)
      CHECK(std::abs(d_inner(dint, comp.zeta[static_cast<std::size_t>(i)],
                             disp.strain[static_cast<std::size_t>(n)])) <=
            1e-8 * std::sqrt(disp.lambda[n]));
  }

  // deterministic rebuild
  const ComplementBasis again = complement_basis(mesh, dint, disp, 6);
  for (int i = 0; i < 6; ++i)
    for (int e = 0; e < mesh.n_elems(); ++e)
      for (int s = 0; s < 6; ++s)
        CHECK(comp.zeta[static_cast<std::size_t>(i)][static_cast<std::size_t>(e)][static_cast<std::size_t>(s)] ==
              again.zeta[static_cast<std::size_t>(i)][static_cast<std::size_t>(e)][static_cast<std::size_t>(s)]);
}

TEST_CASE("complement spans the full strain space at k = 0") {
  // a 1x1 mesh has 2 elements, so the P0 tensor space has dimension 12
  const Mesh mesh = build_mesh(1.0, 1.0, 1, 1);
  const MaterialField mat = MaterialField::constant_isotropic(1.0, 1.0);
  const TriangleRule rule = triangle_rule(4);
  const auto dint = integrated_moduli(mesh, mat, rule);
  DispBasis empty;
  empty.lambda.resize(0);
  empty.w.resize(2 * mesh.n_nodes(), 0);

  const ComplementBasis full = complement_basis(mesh, dint, empty, 12);
  CHECK(full.count() == 12);
  CHECK_THROWS(complement_basis(mesh, dint, empty, 13));
}

TEST_CASE("strain projection recovers basis coefficients") {
  const Mesh mesh = build_mesh(1.0, 1.0, 4, 4);
  const MaterialField mat = MaterialField::constant_isotropic(1.0, 1.0);
  const TriangleRule rule = triangle_rule(4);
  const auto dint = integrated_moduli(mesh, mat, rule);
  const DispBasis disp = elastostatic_eigenbasis(mesh, mat, rule, 3);
  const ComplementBasis comp = complement_basis(mesh, dint, disp, 4);

  // field = strain of mode 1
  const auto& s1 = disp.strain[1];
  auto field1 = [&s1](int e, int, double, double) { return s1[static_cast<std::size_t>(e)]; };
  const StrainProjection p1 = project_strain(mesh, mat, rule, disp, comp, field1);
  CHECK(std::abs(p1.gamma[0]) <= 1e-8);
  CHECK(p1.gamma[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(p1.delta.lpNorm<Eigen::Infinity>() <= 1e-8);

  // field = complement mode 2
  const auto& z2 = comp.zeta[2];
  auto field2 = [&z2](int e, int, double, double) { return z2[static_cast<std::size_t>(e)]; };
  const StrainProjection p2 = project_strain(mesh, mat, rule, disp, comp, field2);
  CHECK(p2.delta[2] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(p2.delta[0]) + std::abs(p2.delta[1]) + std::abs(p2.delta[3]) <= 1e-8);
  CHECK(p2.gamma.lpNorm<Eigen::Infinity>() <= 1e-8);

  // Bessel inequality for a random field: projected energy below field energy
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<SymTensor3> rf(static_cast<std::size_t>(mesh.n_elems()));
  for (auto& t : rf)
    for (int i = 0; i < 6; ++i) t[static_cast<std::size_t>(i)] = u(rng);
  auto field3 = [&rf](int e, int, double, double) { return rf[static_cast<std::size_t>(e)]; };
  const StrainProjection p3 = project_strain(mesh, mat, rule, disp, comp, field3);
  double projected = p3.delta.squaredNorm();
  for (int n = 0; n < 3; ++n) projected += p3.gamma[n] * p3.gamma[n] * disp.lambda[n];
  const double total = d_inner(dint, rf, rf);
  CHECK(projected <= total * (1.0 + 1e-10));
}

TEST_CASE("temperature projection is an l2 projection") {
  const Mesh mesh = build_mesh(1.0, 1.0, 8, 8);
  const TempBasis temp = neumann_eigenbasis(mesh, 4);
  const Eigen::VectorXd beta0 = project_temperature(mesh, temp, temp.v.col(2));
  CHECK(beta0[2] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(beta0[0]) + std::abs(beta0[1]) + std::abs(beta0[3]) <= 1e-8);
}
