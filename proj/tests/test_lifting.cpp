#include <doctest.h>

#include <cmath>
#include <random>

#include "tvesim/lifting.hpp"

using namespace tvesim;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd nodal_vector(const Mesh& mesh, const std::function<std::array<double, 2>(double, double)>& f) {
  Eigen::VectorXd v(2 * mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const auto& p = mesh.nodes[static_cast<std::size_t>(i)];
    const auto val = f(p[0], p[1]);
    v[2 * i] = val[0];
    v[2 * i + 1] = val[1];
  }
  return v;
}

Eigen::VectorXd nodal_scalar(const Mesh& mesh, const std::function<double(double, double)>& f) {
  Eigen::VectorXd v(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const auto& p = mesh.nodes[static_cast<std::size_t>(i)];
    v[i] = f(p[0], p[1]);
  }
  return v;
}

// manufactured displacement (sin(pi x) sin(pi y), 0) for lambda = mu = 1
std::array<double, 2> manufactured_load(double x, double y) {
  const double pp = kPi * kPi;
  return {4.0 * pp * std::sin(kPi * x) * std::sin(kPi * y),
          -2.0 * pp * std::cos(kPi * x) * std::cos(kPi * y)};
}

double elastic_l2_error(const Mesh& mesh, const Eigen::VectorXd& u) {
  const Eigen::VectorXd exact = nodal_vector(mesh, [](double x, double y) {
    return std::array<double, 2>{std::sin(kPi * x) * std::sin(kPi * y), 0.0};
  });
  const Eigen::VectorXd e = u - exact;
  return std::sqrt(e.dot(mass_vector(mesh) * e));
}

}  // namespace

TEST_CASE("zero data gives the zero lifting") {
  const Mesh mesh = build_mesh(1.0, 1.0, 4, 4);
  const MaterialField mat = MaterialField::constant_isotropic(1.0, 1.0);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * mesh.n_nodes());
  const LiftingElastic lift = solve_static_elastic(mesh, mat, triangle_rule(4), z, z);
  CHECK(lift.u.lpNorm<Eigen::Infinity>() <= 1e-13);
  CHECK(lift.stress_max <= 1e-12);
  CHECK(lift.stability == 0.0);
}

TEST_CASE("strain-free boundary data produces no stress") {
  const Mesh mesh = build_mesh(1.0, 1.0, 5, 5);
  const MaterialField mat = MaterialField::constant_isotropic(2.0, 1.0);
  const ElasticLiftingSolver solver(mesh, mat, triangle_rule(4));
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * mesh.n_nodes());

  const Eigen::VectorXd trans =
      nodal_vector(mesh, [](double, double) { return std::array<double, 2>{0.3, -0.2}; });
  const LiftingElastic a = solver.solve(z, trans);
  CHECK(a.stress_max <= 1e-10);
  CHECK((a.u - trans).lpNorm<Eigen::Infinity>() <= 1e-10);

  const Eigen::VectorXd rot =
      nodal_vector(mesh, [](double x, double y) { return std::array<double, 2>{-0.1 * y, 0.1 * x}; });
  const LiftingElastic b = solver.solve(z, rot);
  CHECK(b.stress_max <= 1e-10);
}

TEST_CASE("manufactured elastic solution converges at second order") {
  const MaterialField mat = MaterialField::constant_isotropic(1.0, 1.0);
  double err[2];
  double stab[2];
  int idx = 0;
  for (int n : {8, 16}) {
    const Mesh mesh = build_mesh(1.0, 1.0, n, n);
    const Eigen::VectorXd f = nodal_vector(mesh, manufactured_load);
    const Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * mesh.n_nodes());
    const LiftingElastic lift = solve_static_elastic(mesh, mat, triangle_rule(4), f, g);
    err[idx] = elastic_l2_error(mesh, lift.u);
    stab[idx] = lift.stability;
    ++idx;
  }
  const double rate = std::log(err[0] / err[1]) / std::log(2.0);
  CHECK(rate == doctest::Approx(2.0).epsilon(0.2));
  // reported stability constant is mesh-stable
  CHECK(std::abs(stab[0] - stab[1]) <= 0.2 * std::max(stab[0], stab[1]));
}

TEST_CASE("lifting is linear in its data") {
  const Mesh mesh = build_mesh(1.0, 1.0, 6, 6);
  const MaterialField mat = MaterialField::constant_isotropic(1.5, 0.7);
  const ElasticLiftingSolver solver(mesh, mat, triangle_rule(4));

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u01(-1.0, 1.0);
  Eigen::VectorXd f1(2 * mesh.n_nodes()), f2(2 * mesh.n_nodes()), g(2 * mesh.n_nodes());
  for (int i = 0; i < f1.size(); ++i) {
    f1[i] = u01(rng);
    f2[i] = u01(rng);
    g[i] = 0.1 * u01(rng);
  }

  const Eigen::VectorXd sum = solver.solve(f1 + f2, g).u;
  const Eigen::VectorXd split = solver.solve(f1, g).u + solver.solve(f2, Eigen::VectorXd::Zero(g.size())).u;
  CHECK((sum - split).lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + sum.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("stored stress matches the moduli applied to the strain") {
  const Mesh mesh = build_mesh(1.0, 1.0, 4, 4);
  const MaterialField mat = MaterialField::constant_isotropic(1.0, 2.0);
  const TriangleRule rule = triangle_rule(4);
  const Eigen::VectorXd f = nodal_vector(mesh, manufactured_load);
  const Eigen::VectorXd g = nodal_vector(mesh, [](double x, double y) {
    return std::array<double, 2>{0.05 * x * y, -0.03 * x};
  });
  const LiftingElastic lift = solve_static_elastic(mesh, mat, rule, f, g);

  for (int e = 0; e < mesh.n_elems(); ++e) {
    const SymTensor3 eps = element_strain(mesh, e, lift.u);
    CHECK(tnorm(eps - lift.strain[static_cast<std::size_t>(e)]) <= 1e-14);
    for (std::size_t q = 0; q < rule.n; ++q) {
      const auto& p = rule.pts[q];
      const SymTensor3 t = mat.at(mesh, e, p.l1, p.l2).apply(eps);
      const SymTensor3 s = lift.stress[static_cast<std::size_t>(e)][q];
      CHECK(tnorm(t - s) <= 1e-12 * (1.0 + tnorm(t)));
      // deviator accessor strips the trace
      CHECK(std::abs(lift.stress_dev(e, static_cast<int>(q)).trace()) <= 1e-12 * (1.0 + tnorm(s)));
    }
  }

  // interior weak residual vanishes to solver accuracy
  const SpMat k = stiffness_elastic(mesh, mat, rule);
  const SpMat m = mass_vector(mesh);
  const DofMap map = interior_vector_map(mesh);
  const Eigen::VectorXd r = restrict_vector(k * lift.u - m * f, map);
  CHECK(r.lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + f.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("time-independent data is cached once") {
  const Mesh mesh = build_mesh(1.0, 1.0, 4, 4);
  const MaterialField mat = MaterialField::constant_isotropic(1.0, 1.0);
  const ElasticLifting lift(mesh, mat, triangle_rule(4),
                            {Expression::parse("1"), Expression()},
                            {Expression(), Expression()});
  CHECK_FALSE(lift.time_dependent());
  const LiftingElastic& a = lift.at(0.0);
  const LiftingElastic& b = lift.at(0.7);
  CHECK(&a == &b);

  const ElasticLifting moving(mesh, mat, triangle_rule(4),
                              {Expression::parse("t"), Expression()},
                              {Expression(), Expression()});
  CHECK(moving.time_dependent());
  const LiftingElastic& c = moving.at(0.5);
  const LiftingElastic& d = moving.at(1.0);
  CHECK(&c != &d);
  // load scales linearly in t, so does the solution
  CHECK((d.u - 2.0 * c.u).lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + d.u.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("constant temperature is a steady state") {
  const Mesh mesh = build_mesh(1.0, 1.0, 6, 6);
  const Eigen::VectorXd theta0 = Eigen::VectorXd::Constant(mesh.n_nodes(), 3.0);
  const LiftingHeat heat = solve_lifting_heat(mesh, Expression(), theta0, 1.0, 10);
  for (const auto& th : heat.theta)
    CHECK((th.array() - 3.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("homogeneous flux conserves mass") {
  const Mesh mesh = build_mesh(1.0, 1.0, 6, 6);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u01(-1.0, 1.0);
  Eigen::VectorXd theta0(mesh.n_nodes());
  for (int i = 0; i < theta0.size(); ++i) theta0[i] = u01(rng);

  const LiftingHeat heat = solve_lifting_heat(mesh, Expression(), theta0, 0.5, 8);
  const SpMat m = mass_scalar(mesh);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.n_nodes());
  const double mass0 = ones.dot(m * theta0);
  for (const auto& th : heat.theta)
    CHECK(std::abs(ones.dot(m * th) - mass0) <= 1e-10 * (1.0 + std::abs(mass0)));
}

TEST_CASE("linear steady profile is reproduced exactly") {
  const Mesh mesh = build_mesh(1.0, 1.0, 8, 8);
  const Eigen::VectorXd theta0 = nodal_scalar(mesh, [](double x, double) { return x; });
  const BoundaryFn g = [](double x, double, double) {
    if (x < 1e-12) return -1.0;
    if (x > 1.0 - 1e-12) return 1.0;
    return 0.0;
  };
  const LiftingHeat heat = solve_lifting_heat(mesh, g, theta0, 0.5, 5);
  for (const auto& th : heat.theta)
    CHECK((th - theta0).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("manufactured heat decay converges") {
  // exact solution exp(-pi^2 t) cos(pi x) with zero flux
  const double t_final = 0.05;
  double err[2];
  double stab[2];
  int idx = 0;
  for (int n : {8, 16}) {
    const Mesh mesh = build_mesh(1.0, 1.0, n, n);
    const Eigen::VectorXd theta0 = nodal_scalar(mesh, [](double x, double) { return std::cos(kPi * x); });
    const int steps = n * n / 8;  // dt proportional to h^2
    const LiftingHeat heat = solve_lifting_heat(mesh, Expression(), theta0, t_final, steps);
    const double amp = std::exp(-kPi * kPi * t_final);
    const Eigen::VectorXd exact =
        nodal_scalar(mesh, [&](double x, double) { return amp * std::cos(kPi * x); });
    err[idx] = (heat.theta.back() - exact).lpNorm<Eigen::Infinity>();
    stab[idx] = heat.stability;
    ++idx;
  }
  const double rate = std::log(err[0] / err[1]) / std::log(2.0);
  CHECK(rate == doctest::Approx(2.0).epsilon(0.2));
  CHECK(std::abs(stab[0] - stab[1]) <= 0.2 * std::max(stab[0], stab[1]));
}

TEST_CASE("heat stability constant is finite and mesh-stable under boundary load") {
  double stab[2];
  int idx = 0;
  for (int n : {8, 16}) {
    const Mesh mesh = build_mesh(1.0, 1.0, n, n);
    const Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(mesh.n_nodes());
    const LiftingHeat heat =
        solve_lifting_heat(mesh, Expression::parse("sin(pi*y)"), theta0, 0.25, 20);
    CHECK(std::isfinite(heat.stability));
    CHECK(heat.stability > 0.0);
    stab[idx++] = heat.stability;
  }
  CHECK(std::abs(stab[0] - stab[1]) <= 0.2 * std::max(stab[0], stab[1]));
}

TEST_CASE("trajectory queries blend linearly in time") {
  const Mesh mesh = build_mesh(1.0, 1.0, 4, 4);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Eigen::VectorXd theta0(mesh.n_nodes());
  for (int i = 0; i < theta0.size(); ++i) theta0[i] = u01(rng);

  const LiftingHeat heat = solve_lifting_heat(mesh, Expression::parse("x*t"), theta0, 1.0, 4);
  REQUIRE(heat.theta.size() == 5);
  CHECK((heat.at_time(heat.times[2]) - heat.theta[2]).lpNorm<Eigen::Infinity>() <= 1e-14);
  const Eigen::VectorXd mid = heat.at_time(0.5 * (heat.times[1] + heat.times[2]));
  const Eigen::VectorXd avg = 0.5 * (heat.theta[1] + heat.theta[2]);
  CHECK((mid - avg).lpNorm<Eigen::Infinity>() <= 1e-13);
  // clamped outside the grid
  CHECK((heat.at_time(-1.0) - heat.theta.front()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((heat.at_time(2.0) - heat.theta.back()).lpNorm<Eigen::Infinity>() == 0.0);
}
