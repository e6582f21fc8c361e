#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "tvesim/evolution.hpp"

using namespace tvesim;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct SimOpts {
  int nx = 4;
  int k = 3;
  int l = 3;
  double trunc = 10.0;
  double shear = 0.0;   // boundary displacement g = shear * (y, x)
  double shift0 = 0.0;  // constant initial heat shift
  std::string phi;      // empty: unit temperature factor
  double phi_lo = 1.0;
  double phi_hi = 1.0;
  double p = 2.0;
  kernels::Exec exec = kernels::Exec::parallel;
};

// Owns every ingredient the evolution references; heap-allocated so the
// internal references stay valid.
struct Sim {
  Mesh mesh;
  MaterialField mat = MaterialField::constant_isotropic(1.0, 1.0);
  TriangleRule rule = triangle_rule(2);
  TempBasis temp;
  DispBasis disp;
  ComplementBasis comp;
  NFunction m;
  ComplementaryNFunction ms;
  GModel model;
  std::optional<ElasticLifting> elastic;
  LiftingHeat heat;
  std::optional<Evolution> evo;

  Evolution& e() { return *evo; }
};

std::unique_ptr<Sim> make_sim(const SimOpts& o) {
  auto s = std::make_unique<Sim>();
  s->mesh = build_mesh(1.0, 1.0, o.nx, o.nx);
  s->temp = neumann_eigenbasis(s->mesh, o.l);
  s->disp = elastostatic_eigenbasis(s->mesh, s->mat, s->rule, o.k);
  const auto dint = integrated_moduli(s->mesh, s->mat, s->rule);
  s->comp = complement_basis(s->mesh, dint, s->disp, o.l);
  s->m = NFunction::power_constant(o.p);
  s->ms = ComplementaryNFunction::of(s->m, RadialGrid{});
  const std::string phi = o.phi.empty() ? "1" : o.phi;
  s->model = GModel::power_law(s->m, Expression::parse(phi), o.phi_lo, o.phi_hi, 1.0);
  std::array<Expression, 2> f{};
  std::array<Expression, 2> g{};
  if (o.shear != 0.0) {
    g[0] = Expression::parse(std::to_string(o.shear) + "*y");
    g[1] = Expression::parse(std::to_string(o.shear) + "*x");
  }
  s->elastic.emplace(s->mesh, s->mat, s->rule, f, g);
  const Eigen::VectorXd th0 = Eigen::VectorXd::Constant(s->mesh.n_nodes(), o.shift0);
  s->heat = solve_lifting_heat(s->mesh, BoundaryFn{}, th0, 4.0, 64);
  s->evo.emplace(s->mesh, s->mat, s->rule, s->temp, s->disp, s->comp, *s->elastic, s->heat,
                 s->model, s->m, s->ms, o.trunc, o.exec);
  return s;
}

State random_state(const Evolution& e, unsigned long long seed, double amp) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, amp);
  State s;
  s.t = 0.0;
  s.gamma.resize(e.n_gamma());
  s.delta.resize(e.n_delta());
  s.beta.resize(e.n_delta());
  for (Eigen::Index i = 0; i < s.gamma.size(); ++i) s.gamma[i] = n(rng);
  for (Eigen::Index i = 0; i < s.delta.size(); ++i) s.delta[i] = n(rng);
  for (Eigen::Index i = 0; i < s.beta.size(); ++i) s.beta[i] = n(rng);
  return s;
}

double state_dist(const State& u, const State& v) {
  return std::sqrt((u.gamma - v.gamma).squaredNorm() + (u.delta - v.delta).squaredNorm() +
                   (u.beta - v.beta).squaredNorm());
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

}  // namespace

TEST_CASE("initial state projects and truncates the data") {
  SimOpts o;
  o.trunc = 2.0;
  auto sp = make_sim(o);
  Sim& s = *sp;
  const int nn = s.mesh.n_nodes();

  SUBCASE("zero data gives the zero state") {
    const State z = s.e().initial_state(Eigen::VectorXd::Zero(nn), {});
    CHECK(z.t == 0.0);
    CHECK(z.gamma.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(z.delta.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(z.beta.lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  SUBCASE("constant temperature above the truncation level is clamped") {
    const State st = s.e().initial_state(Eigen::VectorXd::Constant(nn, 5.0), {});
    const Fields f = s.e().reconstruct(st);
    for (int i = 0; i < nn; ++i) CHECK(std::abs(f.theta[i] - 2.0) <= 1e-8);
  }

  SUBCASE("a complement mode projects onto its own coefficient") {
    const QpTensorFn mode = [&](int e, int, double, double) {
      return s.comp.zeta[2][static_cast<std::size_t>(e)];
    };
    const State st = s.e().initial_state(Eigen::VectorXd::Zero(nn), mode);
    CHECK(std::abs(st.delta[2] - 1.0) <= 1e-8);
    CHECK(std::abs(st.delta[0]) <= 1e-8);
    CHECK(std::abs(st.delta[1]) <= 1e-8);
    CHECK(st.gamma.lpNorm<Eigen::Infinity>() <= 1e-8);
  }

  SUBCASE("input validation") {
    CHECK_THROWS_AS(s.e().initial_state(Eigen::VectorXd::Zero(nn + 1), {}), std::invalid_argument);
    const QpTensorFn dilating = [](int, int, double, double) { return SymTensor3::identity(); };
    CHECK_THROWS_AS(s.e().initial_state(Eigen::VectorXd::Zero(nn), dilating),
                    std::invalid_argument);
  }
}

TEST_CASE("reconstruct maps coefficients back to fields") {
  SimOpts o;
  auto sp = make_sim(o);
  Sim& s = *sp;
  State st;
  st.gamma = Eigen::VectorXd::Zero(o.k);
  st.delta = Eigen::VectorXd::Zero(o.l);
  st.beta = Eigen::VectorXd::Zero(o.l);

  SUBCASE("zero state gives zero fields") {
    const Fields f = s.e().reconstruct(st);
    CHECK(f.u.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(f.theta.lpNorm<Eigen::Infinity>() == 0.0);
    for (const auto& t : f.epsp) CHECK(tnorm(t) == 0.0);
    for (const auto& row : f.stress)
      for (const auto& t : row) CHECK(tnorm(t) == 0.0);
  }

  SUBCASE("one complement coefficient produces minus D zeta") {
    st.delta[0] = 1.0;
    const Fields f = s.e().reconstruct(st);
    for (int e = 0; e < s.mesh.n_elems(); ++e) {
      const std::size_t ei = static_cast<std::size_t>(e);
      const SymTensor3 want = s.mat.at(s.mesh, e, 1.0 / 3.0, 1.0 / 3.0).apply(s.comp.zeta[0][ei]) * -1.0;
      CHECK(tnorm(f.stress[ei][0] - want) <= 1e-14 * (1.0 + tnorm(want)));
      CHECK(tnorm(f.epsp[ei] - s.comp.zeta[0][ei]) == 0.0);
    }
  }

  SUBCASE("one displacement coefficient leaves the stress untouched") {
    st.gamma[1] = 1.0;
    const Fields f = s.e().reconstruct(st);
    CHECK((f.u - s.disp.w.col(1)).lpNorm<Eigen::Infinity>() == 0.0);
    for (int e = 0; e < s.mesh.n_elems(); ++e) {
      const std::size_t ei = static_cast<std::size_t>(e);
      CHECK(tnorm(f.stress[ei][0]) == 0.0);
      CHECK(tnorm(f.epsp[ei] - s.disp.strain[1][ei]) == 0.0);
    }
  }
}

TEST_CASE("the Galerkin stress is in equilibrium against the displacement modes") {
  SimOpts o;
  o.k = 3;
  o.l = 4;
  auto sp = make_sim(o);
  Sim& s = *sp;
  const State st = random_state(s.e(), 11, 0.7);
  const Fields f = s.e().reconstruct(st);

  double tmax = 0.0;
  for (int e = 0; e < s.mesh.n_elems(); ++e)
    tmax = std::max(tmax, tnorm(f.stress[static_cast<std::size_t>(e)][0]));

  for (int n = 0; n < o.k; ++n) {
    double r = 0.0;
    for (int e = 0; e < s.mesh.n_elems(); ++e) {
      const std::size_t ei = static_cast<std::size_t>(e);
      r += s.mesh.area[ei] * ddot(f.stress[ei][0], s.disp.strain[static_cast<std::size_t>(n)][ei]);
    }
    CHECK(std::abs(r) <= 1e-8 * (1.0 + tmax));
  }
}

TEST_CASE("rhs matches a direct element sum") {
  SimOpts o;
  o.shear = 0.1;
  o.shift0 = 0.2;
  o.phi = "1 + theta";
  o.phi_lo = 1.0;
  o.phi_hi = 65.0;
  o.trunc = 0.3;
  auto sp = make_sim(o);
  Sim& s = *sp;
  const State st = random_state(s.e(), 77, 0.1);
  const Derivative d = s.e().rhs(st);

  // independent recomputation with plain loops
  const LiftingElastic& le = s.elastic->at(0.0);
  Eigen::VectorXd theta = s.heat.at_time(0.0);
  theta += s.temp.v * st.beta;
  std::vector<Eigen::VectorXd> vcols;
  for (int m = 0; m < o.l; ++m) vcols.push_back(s.temp.v.col(m));

  Eigen::VectorXd gdot = Eigen::VectorXd::Zero(o.k);
  Eigen::VectorXd ddot_ref = Eigen::VectorXd::Zero(o.l);
  Eigen::VectorXd bsrc = Eigen::VectorXd::Zero(o.l);
  int clamped = 0;
  int total = 0;
  for (int e = 0; e < s.mesh.n_elems(); ++e) {
    const std::size_t ei = static_cast<std::size_t>(e);
    SymTensor3 comb;
    for (int m = 0; m < o.l; ++m) comb += s.comp.zeta[static_cast<std::size_t>(m)][ei] * st.delta[m];
    for (std::size_t q = 0; q < s.rule.n; ++q) {
      const auto& qp = s.rule.pts[q];
      const double w = 2.0 * s.mesh.area[ei] * qp.w;
      const ElasticModuli dm = s.mat.at(s.mesh, e, qp.l1, qp.l2);
      const SymTensor3 td = (dm.apply(comb) * -1.0).dev() + le.stress_dev(e, static_cast<int>(q));
      const double th = eval_p1(s.mesh, theta, e, qp.l1, qp.l2);
      const SymTensor3 g = td.dev() * s.model.temperature_factor(th);
      const double heating = ddot(td.dev(), g);
      const double src = std::clamp(heating, -o.trunc, o.trunc);
      ++total;
      if (heating > o.trunc) ++clamped;
      for (int n = 0; n < o.k; ++n)
        gdot[n] += w * ddot(g, dm.apply(s.disp.strain[static_cast<std::size_t>(n)][ei]));
      for (int m = 0; m < o.l; ++m) {
        ddot_ref[m] += w * ddot(g, dm.apply(s.comp.zeta[static_cast<std::size_t>(m)][ei]));
        bsrc[m] += w * src * eval_p1(s.mesh, vcols[static_cast<std::size_t>(m)], e, qp.l1, qp.l2);
      }
    }
  }
  for (int n = 0; n < o.k; ++n) gdot[n] /= s.disp.lambda[n];

  CHECK(clamped > 0);
  CHECK(clamped < total);
  for (int n = 0; n < o.k; ++n) CHECK(close(d.gamma_dot[n], gdot[n], 1e-10));
  for (int m = 0; m < o.l; ++m) CHECK(close(d.delta_dot[m], ddot_ref[m], 1e-10));
  for (int m = 0; m < o.l; ++m)
    CHECK(close(d.beta_dot[m], bsrc[m] - s.temp.mu[m] * st.beta[m], 1e-10));

  // truncation bounds each source integral by K times the L1 mass of the mode
  for (int m = 0; m < o.l; ++m) {
    double l1 = 0.0;
    for (int e = 0; e < s.mesh.n_elems(); ++e) {
      const auto& tri = s.mesh.tris[static_cast<std::size_t>(e)];
      double mx = 0.0;
      for (int j = 0; j < 3; ++j) mx = std::max(mx, std::abs(s.temp.v(tri[j], m)));
      l1 += s.mesh.area[static_cast<std::size_t>(e)] * mx;
    }
    CHECK(std::abs(bsrc[m]) <= o.trunc * l1 + 1e-12);
  }

  // with no active truncation the instantaneous diagnostics match the sums
  Evolution wide(s.mesh, s.mat, s.rule, s.temp, s.disp, s.comp, *s.elastic, s.heat, s.model, s.m,
                 s.ms, 1e9, o.exec);
  const Derivative dw = wide.rhs(st);
  Eigen::VectorXd bfree = Eigen::VectorXd::Zero(o.l);
  double dis = 0.0;
  double gal = 0.0;
  for (int e = 0; e < s.mesh.n_elems(); ++e) {
    const std::size_t ei = static_cast<std::size_t>(e);
    SymTensor3 comb;
    for (int m = 0; m < o.l; ++m) comb += s.comp.zeta[static_cast<std::size_t>(m)][ei] * st.delta[m];
    for (std::size_t q = 0; q < s.rule.n; ++q) {
      const auto& qp = s.rule.pts[q];
      const double w = 2.0 * s.mesh.area[ei] * qp.w;
      const ElasticModuli dm = s.mat.at(s.mesh, e, qp.l1, qp.l2);
      const SymTensor3 tg = dm.apply(comb) * -1.0;
      const SymTensor3 td = tg.dev() + le.stress_dev(e, static_cast<int>(q));
      const double th = eval_p1(s.mesh, theta, e, qp.l1, qp.l2);
      const SymTensor3 g = td.dev() * s.model.temperature_factor(th);
      const double heating = ddot(td.dev(), g);
      dis += w * heating;
      gal += w * ddot(g, tg);
      for (int m = 0; m < o.l; ++m)
        bfree[m] += w * heating * eval_p1(s.mesh, vcols[static_cast<std::size_t>(m)], e, qp.l1, qp.l2);
    }
  }
  for (int m = 0; m < o.l; ++m)
    CHECK(close(dw.beta_dot[m], bfree[m] - s.temp.mu[m] * st.beta[m], 1e-10));
  const Trajectory flat = wide.integrate(st, 0.0, 0.0, 1);
  REQUIRE(flat.diag.size() == 1);
  CHECK(close(flat.diag[0].dissipation, dis, 1e-10));
  CHECK(close(flat.diag[0].galerkin_power, gal, 1e-10));
  CHECK(close(flat.diag[0].source, dis, 1e-10));
  CHECK(flat.diag[0].acc_m_stress == 0.0);

  // dimension validation
  State bad = st;
  bad.gamma.resize(o.k + 1);
  CHECK_THROWS_AS(s.e().rhs(bad), std::invalid_argument);
}

TEST_CASE("pure decay is reproduced exactly") {
  SimOpts o;
  auto sp = make_sim(o);
  Sim& s = *sp;

  State st;
  st.gamma = Eigen::VectorXd::Zero(o.k);
  st.delta = Eigen::VectorXd::Zero(o.l);
  st.beta.resize(o.l);
  st.beta << 1.0, -0.5, 0.25;

  const double dt = 0.05;
  const int nsteps = 10;
  const Trajectory tr = s.e().integrate(st, dt * nsteps, dt, 1);
  REQUIRE(!tr.aborted);
  REQUIRE(tr.states.size() == static_cast<std::size_t>(nsteps) + 1);

  Eigen::VectorXd ref = st.beta;
  for (int n = 1; n <= nsteps; ++n) {
    for (int m = 0; m < o.l; ++m) ref[m] = std::exp(-s.temp.mu[m] * dt) * ref[m];
    const State& got = tr.states[static_cast<std::size_t>(n)];
    for (int m = 0; m < o.l; ++m) CHECK(got.beta[m] == ref[m]);
    CHECK(got.gamma.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(got.delta.lpNorm<Eigen::Infinity>() == 0.0);
  }
  CHECK(tr.states.back().t == dt * nsteps);
  CHECK(tr.diag.back().energy == 0.0);
  CHECK(tr.diag.back().dissipation == 0.0);
  CHECK(tr.diag.back().theta_l1 > 0.0);
}

TEST_CASE("the zero state is a fixed point") {
  SimOpts o;
  auto sp = make_sim(o);
  Sim& s = *sp;
  const State z = s.e().initial_state(Eigen::VectorXd::Zero(s.mesh.n_nodes()), {});

  const Derivative d = s.e().rhs(z);
  CHECK(d.gamma_dot.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(d.delta_dot.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(d.beta_dot.lpNorm<Eigen::Infinity>() <= 1e-12);

  const State next = s.e().step(z, 0.1);
  CHECK(next.t == doctest::Approx(0.1));
  CHECK(next.gamma.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(next.delta.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(next.beta.lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("stepping is second order in dt") {
  SimOpts o;
  o.k = 2;
  o.l = 2;
  o.shear = 0.1;
  o.phi = "1 + theta";
  o.phi_lo = 1.0;
  o.phi_hi = 65.0;
  auto sp = make_sim(o);
  Sim& s = *sp;

  Eigen::VectorXd th0(s.mesh.n_nodes());
  for (int i = 0; i < s.mesh.n_nodes(); ++i)
    th0[i] = 0.5 + 0.3 * std::cos(kPi * s.mesh.nodes[static_cast<std::size_t>(i)][0]);
  const QpTensorFn epsp0 = [&](int e, int, double, double) {
    return s.comp.zeta[0][static_cast<std::size_t>(e)] * 0.5;
  };
  const State s0 = s.e().initial_state(th0, epsp0);

  const auto final_state = [&](double dt) {
    const Trajectory tr = s.e().integrate(s0, 0.4, dt, 1 << 20);
    REQUIRE(!tr.aborted);
    return tr.states.back();
  };
  const State a = final_state(0.01);
  const State b = final_state(0.005);
  const State c = final_state(0.0025);
  const double e1 = state_dist(a, b);
  const double e2 = state_dist(b, c);
  REQUIRE(e2 > 0.0);
  const double order = std::log2(e1 / e2);
  CHECK(order > 1.7);
  CHECK(order < 2.35);

  // energy identity: E(t) - E(0) + accumulated Galerkin power = O(dt^2)
  const Trajectory tr = s.e().integrate(s0, 0.4, 0.01, 1);
  REQUIRE(!tr.aborted);
  const double e0 = tr.diag.front().energy;
  double worst = 0.0;
  for (const auto& dg : tr.diag)
    worst = std::max(worst, std::abs(dg.energy - e0 + dg.acc_galerkin_power));
  CHECK(worst <= 1e-3);
  CHECK(tr.diag.back().energy > 0.0);
}

TEST_CASE("integrate bookkeeping and validation") {
  SimOpts o;
  o.shear = 0.1;
  auto sp = make_sim(o);
  Sim& s = *sp;
  const State s0 = s.e().initial_state(Eigen::VectorXd::Zero(s.mesh.n_nodes()), {});

  SUBCASE("zero horizon stores exactly the initial point") {
    const Trajectory tr = s.e().integrate(s0, 0.0, 0.0, 1);
    REQUIRE(tr.states.size() == 1);
    REQUIRE(tr.diag.size() == 1);
    CHECK(tr.diag[0].energy == 0.0);
    CHECK(!tr.aborted);
  }

  SUBCASE("stride keeps the first and last points and the exact grid times") {
    const Trajectory tr = s.e().integrate(s0, 0.5, 0.05, 3);
    REQUIRE(!tr.aborted);
    REQUIRE(tr.states.size() == 5);  // steps 0, 3, 6, 9, 10
    CHECK(tr.states[0].t == 0.0);
    CHECK(tr.states[1].t == 3 * 0.05);
    CHECK(tr.states[2].t == 6 * 0.05);
    CHECK(tr.states[3].t == 9 * 0.05);
    CHECK(tr.states[4].t == 10 * 0.05);
    for (std::size_t i = 0; i + 1 < tr.diag.size(); ++i) {
      CHECK(tr.diag[i].acc_m_stress <= tr.diag[i + 1].acc_m_stress);
      CHECK(tr.diag[i].acc_ms_flow <= tr.diag[i + 1].acc_ms_flow);
      CHECK(tr.diag[i].acc_m_lift <= tr.diag[i + 1].acc_m_lift);
      CHECK(tr.diag[i].acc_product_l1 <= tr.diag[i + 1].acc_product_l1);
    }
    for (const auto& dg : tr.diag) CHECK(dg.dissipation >= -1e-12);
    CHECK(tr.diag.back().acc_m_stress > 0.0);
    CHECK(tr.diag.back().acc_m_lift > 0.0);
  }

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(s.e().integrate(s0, 0.5, 0.3, 1), std::invalid_argument);
    CHECK_THROWS_AS(s.e().integrate(s0, 0.5, 0.05, 0), std::invalid_argument);
    CHECK_THROWS_AS(s.e().integrate(s0, -1.0, 0.05, 1), std::invalid_argument);
    CHECK_THROWS_AS(s.e().integrate(s0, 0.5, -0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(s.e().step(s0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(s.e().step(s0, -0.1), std::invalid_argument);
  }
}

TEST_CASE("serial and parallel execution agree bitwise") {
  SimOpts o;
  o.shear = 0.1;
  o.shift0 = 0.1;
  o.phi = "1 + theta";
  o.phi_lo = 1.0;
  o.phi_hi = 65.0;
  o.trunc = 0.05;
  auto sp = make_sim(o);
  Sim& s = *sp;
  Evolution serial(s.mesh, s.mat, s.rule, s.temp, s.disp, s.comp, *s.elastic, s.heat, s.model, s.m,
                   s.ms, o.trunc, kernels::Exec::serial);

  const State s0 = random_state(s.e(), 5, 0.05);
  const Trajectory tp = s.e().integrate(s0, 0.2, 0.02, 1);
  const Trajectory ts = serial.integrate(s0, 0.2, 0.02, 1);
  REQUIRE(!tp.aborted);
  REQUIRE(!ts.aborted);
  REQUIRE(tp.states.size() == ts.states.size());
  for (std::size_t i = 0; i < tp.states.size(); ++i) {
    CHECK((tp.states[i].gamma.array() == ts.states[i].gamma.array()).all());
    CHECK((tp.states[i].delta.array() == ts.states[i].delta.array()).all());
    CHECK((tp.states[i].beta.array() == ts.states[i].beta.array()).all());
    CHECK(tp.diag[i].energy == ts.diag[i].energy);
    CHECK(tp.diag[i].acc_galerkin_power == ts.diag[i].acc_galerkin_power);
    CHECK(tp.diag[i].acc_ms_flow == ts.diag[i].acc_ms_flow);
    CHECK(tp.diag[i].source == ts.diag[i].source);
  }
}

TEST_CASE("a large step relaxes through sub-stepping") {
  SimOpts o;
  auto sp = make_sim(o);
  Sim& s = *sp;
  State s0 = random_state(s.e(), 21, 0.0);
  s0.delta << 5.0, -3.0, 2.0;

  const Trajectory tr = s.e().integrate(s0, 2.0, 2.0, 1);
  REQUIRE(!tr.aborted);
  REQUIRE(tr.states.size() == 2);
  CHECK(tr.states.back().t == 2.0);
  CHECK(tr.states.back().finite());
  CHECK(tr.states.back().delta.norm() < s0.delta.norm());

  // the single coarse step stays close to a fine reference
  const Trajectory ref = s.e().integrate(s0, 2.0, 0.005, 400);
  REQUIRE(!ref.aborted);
  CHECK(state_dist(tr.states.back(), ref.states.back()) <=
        0.1 * (1.0 + state_dist(s0, ref.states.back())));
}

TEST_CASE("non-finite flow values abort with a located reason") {
  SimOpts o;
  o.nx = 2;
  o.k = 1;
  o.l = 1;
  o.shear = 0.1;
  o.trunc = 1.0;
  auto sp = make_sim(o);
  Sim& s = *sp;
  const GModel bad = GModel::custom(
      [](double, const SymTensor3& td, double, double) {
        SymTensor3 g = td;
        g[0] = std::numeric_limits<double>::quiet_NaN();
        return g;
      },
      1.0);
  Evolution evo(s.mesh, s.mat, s.rule, s.temp, s.disp, s.comp, *s.elastic, s.heat, bad, s.m, s.ms,
                1.0, kernels::Exec::parallel);
  const State z = evo.initial_state(Eigen::VectorXd::Zero(s.mesh.n_nodes()), {});

  CHECK_THROWS_AS(evo.step(z, 0.1), std::runtime_error);
  const Trajectory tr = evo.integrate(z, 0.3, 0.1, 1);
  CHECK(tr.aborted);
  CHECK(tr.states.empty());
  CHECK(tr.abort_reason.find("element") != std::string::npos);
}

TEST_CASE("construction validates the coupling") {
  SimOpts o;
  auto sp = make_sim(o);
  Sim& s = *sp;
  const TempBasis t2 = neumann_eigenbasis(s.mesh, 2);
  CHECK_THROWS_AS(Evolution(s.mesh, s.mat, s.rule, t2, s.disp, s.comp, *s.elastic, s.heat, s.model,
                            s.m, s.ms, 1.0, kernels::Exec::serial),
                  std::invalid_argument);
  CHECK_THROWS_AS(Evolution(s.mesh, s.mat, s.rule, s.temp, s.disp, s.comp, *s.elastic, s.heat,
                            s.model, s.m, s.ms, 0.0, kernels::Exec::serial),
                  std::invalid_argument);
}
