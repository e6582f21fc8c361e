#include "tvesim/renormheat.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace tvesim {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// C-infinity bump exp(1 - 1/(1 - u^2)) on (-1, 1). The guard keeps the
// derivative formula free of 0 * inf near the support edge where the value
// underflows anyway.
double bump(double u) {
  const double d = 1.0 - u * u;
  if (d < 1e-9) return 0.0;
  return std::exp(1.0 - 1.0 / d);
}

double bump_derivative(double u) {
  const double d = 1.0 - u * u;
  if (d < 1e-9) return 0.0;
  return std::exp(1.0 - 1.0 / d) * (-2.0 * u / (d * d));
}

Eigen::VectorXd nodal_truncate(double k, const Eigen::VectorXd& v) {
  return v.unaryExpr([k](double r) { return truncate(k, r); });
}

std::vector<Eigen::VectorXd> step_loads(const Mesh& mesh, const TriangleRule& rule,
                                        const SourceFn& f, double t_final, int steps) {
  std::vector<Eigen::VectorXd> loads;
  loads.reserve(static_cast<std::size_t>(steps));
  for (int n = 0; n < steps; ++n) {
    const double t = t_final * static_cast<double>(n + 1) / static_cast<double>(steps);
    loads.push_back(load_scalar(mesh, rule, [&f, t](double x, double y) { return f(x, y, t); }));
  }
  return loads;
}

// Lumped-mass implicit Euler with precomputed loads; the loads belong to the
// right endpoint of each step.
HeatSolution run_steps(const Mesh& mesh, const Eigen::VectorXd& theta0,
                       const std::vector<Eigen::VectorXd>& loads, double t_final, int steps,
                       kernels::Exec exec) {
  const int n = mesh.n_nodes();
  const Eigen::VectorXd ml = lumped_mass_scalar(mesh);
  const SpMat stiff = stiffness_scalar(mesh, exec);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) trips.emplace_back(i, i, ml[i]);
  SpMat lumped(n, n);
  lumped.setFromTriplets(trips.begin(), trips.end());

  const double dt = t_final / static_cast<double>(steps);
  Eigen::SimplicialLDLT<SpMat> ldlt(SpMat(lumped + dt * stiff));
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("solve_truncated: factorization failed");

  HeatSolution sol;
  sol.dt = dt;
  sol.times.resize(static_cast<std::size_t>(steps) + 1);
  sol.theta.resize(static_cast<std::size_t>(steps) + 1);
  sol.times[0] = 0.0;
  sol.theta[0] = theta0;

  double worst = 0.0;
  for (int m = 0; m < steps; ++m) {
    const Eigen::VectorXd& prev = sol.theta[static_cast<std::size_t>(m)];
    const Eigen::VectorXd& load = loads[static_cast<std::size_t>(m)];
    Eigen::VectorXd next = ldlt.solve(ml.cwiseProduct(prev) + dt * load);
    if (!next.allFinite()) throw std::runtime_error("solve_truncated: non-finite state");

    const double gained = ml.dot(next - prev);
    const double fed = dt * load.sum();
    const double scale =
        ml.dot(prev.cwiseAbs()) + ml.dot(next.cwiseAbs()) + dt * load.cwiseAbs().sum() + 1e-300;
    worst = std::max(worst, std::abs(gained - fed) / scale);

    sol.times[static_cast<std::size_t>(m) + 1] =
        t_final * static_cast<double>(m + 1) / static_cast<double>(steps);
    sol.theta[static_cast<std::size_t>(m) + 1] = std::move(next);
  }
  sol.mass_residual = worst;
  return sol;
}

void check_problem(const HeatProblem& p) {
  if (p.mesh == nullptr) throw std::invalid_argument("heat problem: mesh is null");
  if (!(p.t_final > 0.0)) throw std::invalid_argument("heat problem: horizon must be positive");
  if (p.steps < 1) throw std::invalid_argument("heat problem: need at least one step");
  if (!p.source || !p.initial) throw std::invalid_argument("heat problem: family not set");
}

std::pair<SourceFn, Eigen::VectorXd> member_data(const HeatProblem& p, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("heat problem: eps must be positive");
  SourceFn f = p.source(eps);
  Eigen::VectorXd theta0 = p.initial(eps);
  if (theta0.size() != p.mesh->n_nodes())
    throw std::invalid_argument("heat problem: initial datum size mismatch");
  return {std::move(f), std::move(theta0)};
}

// Space-time L1 of a source by element quadrature and right-endpoint steps.
double source_l1_norm(const Mesh& mesh, const TriangleRule& rule, const SourceFn& f,
                      double t_final, int steps, kernels::Exec exec) {
  const double dt = t_final / static_cast<double>(steps);
  double total = 0.0;
  for (int n = 1; n <= steps; ++n) {
    const double t = t_final * static_cast<double>(n) / static_cast<double>(steps);
    total += dt * kernels::reduce_sum(
                      static_cast<std::size_t>(mesh.n_elems()), exec, [&](std::size_t e) {
                        const double two_a = 2.0 * mesh.area[e];
                        double acc = 0.0;
                        for (std::size_t q = 0; q < rule.n; ++q) {
                          const auto x = mesh.point(static_cast<int>(e), rule.pts[q].l1,
                                                    rule.pts[q].l2);
                          acc += rule.pts[q].w * two_a * std::abs(f(x[0], x[1], t));
                        }
                        return acc;
                      });
  }
  return total;
}

}  // namespace

HeatProblem truncated_data_problem(const Mesh& mesh, double t_final, int steps, SourceFn target,
                                   Eigen::VectorXd theta0) {
  if (!target) throw std::invalid_argument("truncated family: target source not set");
  if (theta0.size() != mesh.n_nodes())
    throw std::invalid_argument("truncated family: initial datum size mismatch");
  HeatProblem p;
  p.mesh = &mesh;
  p.t_final = t_final;
  p.steps = steps;
  p.source = [target = std::move(target)](double eps) -> SourceFn {
    if (!(eps > 0.0)) throw std::invalid_argument("truncated family: eps must be positive");
    const double level = 1.0 / eps;
    return [target, level](double x, double y, double t) { return truncate(level, target(x, y, t)); };
  };
  p.initial = [theta0 = std::move(theta0)](double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("truncated family: eps must be positive");
    return nodal_truncate(1.0 / eps, theta0);
  };
  return p;
}

SourceFn singular_source(double amp, std::array<double, 2> x0, double a) {
  if (!(a >= 1.0 && a < 2.0))
    throw std::invalid_argument("singular source: exponent must lie in [1, 2)");
  return [amp, x0, a](double x, double y, double) {
    const double r = std::max(std::hypot(x - x0[0], y - x0[1]), 1e-12);
    return amp * std::pow(r, -a);
  };
}

FamilyReport check_family(const HeatProblem& p, const TriangleRule& rule,
                          const std::vector<double>& eps, kernels::Exec exec) {
  check_problem(p);
  if (eps.empty()) throw std::invalid_argument("family check: empty sequence");

  FamilyReport rep;
  const Eigen::VectorXd ml = lumped_mass_scalar(*p.mesh);
  double eps_min = eps[0];
  Eigen::VectorXd prev_init;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    auto [f, theta0] = member_data(p, eps[i]);
    rep.source_l1.push_back(source_l1_norm(*p.mesh, rule, f, p.t_final, p.steps, exec));
    if (i > 0) rep.initial_gaps.push_back(ml.dot((theta0 - prev_init).cwiseAbs()));
    prev_init = std::move(theta0);
    eps_min = std::min(eps_min, eps[i]);
  }

  auto [f_deep, theta_deep] = member_data(p, eps_min);
  rep.target_l1 = source_l1_norm(*p.mesh, rule, f_deep, p.t_final, p.steps, exec);

  rep.source_bounded = true;
  for (double v : rep.source_l1)
    if (!std::isfinite(v) || v > rep.target_l1 * (1.0 + 1e-9) + 1e-12) rep.source_bounded = false;
  rep.initial_converging = true;
  for (std::size_t i = 1; i < rep.initial_gaps.size(); ++i)
    if (rep.initial_gaps[i] > rep.initial_gaps[i - 1] * (1.0 + 1e-9) + 1e-12)
      rep.initial_converging = false;
  return rep;
}

HeatSolution solve_truncated(const HeatProblem& p, const TriangleRule& rule, double eps,
                             kernels::Exec exec) {
  check_problem(p);
  auto [f, theta0] = member_data(p, eps);
  const auto loads = step_loads(*p.mesh, rule, f, p.t_final, p.steps);
  return run_steps(*p.mesh, theta0, loads, p.t_final, p.steps, exec);
}

double truncation_tail(const Mesh& mesh, const TriangleRule& rule, const HeatSolution& sol,
                       double k, double c, kernels::Exec exec) {
  if (!(k > 0.0) || !(c > 0.0))
    throw std::invalid_argument("truncation tail: level and width must be positive");
  if (sol.theta.size() < 2) throw std::invalid_argument("truncation tail: empty trajectory");

  const std::size_t nt = sol.theta.size();
  double acc = 0.0;
  for (std::size_t n = 0; n < nt; ++n) {
    const double wt = (n == 0 || n + 1 == nt) ? 0.5 * sol.dt : sol.dt;
    const Eigen::VectorXd& th = sol.theta[n];
    acc += wt * kernels::reduce_sum(
                    static_cast<std::size_t>(mesh.n_elems()), exec, [&](std::size_t e) {
                      const auto g = grad_p1(mesh, th, static_cast<int>(e));
                      const double two_a = 2.0 * mesh.area[e];
                      double s = 0.0;
                      for (std::size_t q = 0; q < rule.n; ++q) {
                        const double v =
                            eval_p1(mesh, th, static_cast<int>(e), rule.pts[q].l1, rule.pts[q].l2);
                        const double diff = truncate(k + c, v) - truncate(k, v);
                        const double band = (std::abs(v) >= k && std::abs(v) < k + c) ? 1.0 : 0.0;
                        s += rule.pts[q].w * two_a *
                             (diff * diff + band * (g[0] * g[0] + g[1] * g[1]));
                      }
                      return s;
                    });
  }
  return std::sqrt(acc);
}

SmoothClamp::SmoothClamp(double m) {
  if (!(m > 0.0)) throw std::invalid_argument("smooth clamp: support must be positive");
  m_ = m;
  const int cells = 2048;
  table_.resize(static_cast<std::size_t>(cells) + 1);
  table_[0] = 0.0;
  const double h = m / static_cast<double>(cells);
  for (int i = 0; i < cells; ++i) {
    const double r0 = h * static_cast<double>(i);
    const double rm = r0 + 0.5 * h;
    const double r1 = r0 + h;
    table_[static_cast<std::size_t>(i) + 1] =
        table_[static_cast<std::size_t>(i)] +
        (h / 6.0) * (bump(r0 / m) + 4.0 * bump(rm / m) + bump(r1 / m));
  }
  tail_ = table_.back();
}

SmoothClamp SmoothClamp::constant(double c) {
  SmoothClamp s;
  s.const_ = true;
  s.c_ = c;
  return s;
}

double SmoothClamp::s(double r) const {
  if (const_) return c_;
  const double a = std::abs(r);
  if (a >= m_) return r < 0.0 ? -tail_ : tail_;
  const double h = m_ / static_cast<double>(table_.size() - 1);
  const double x = a / h;
  std::size_t i = static_cast<std::size_t>(x);
  if (i + 2 > table_.size()) i = table_.size() - 2;
  const double t = x - static_cast<double>(i);
  const double y0 = table_[i];
  const double y1 = table_[i + 1];
  const double d0 = bump(h * static_cast<double>(i) / m_);
  const double d1 = bump(h * static_cast<double>(i + 1) / m_);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double v = (1.0 + 2.0 * t3 - 3.0 * t2) * y0 + (t3 - 2.0 * t2 + t) * h * d0 +
                   (3.0 * t2 - 2.0 * t3) * y1 + (t3 - t2) * h * d1;
  return r < 0.0 ? -v : v;
}

double SmoothClamp::ds(double r) const {
  if (const_) return 0.0;
  return bump(r / m_);
}

double SmoothClamp::dds(double r) const {
  if (const_) return 0.0;
  return bump_derivative(r / m_) / m_;
}

SpaceTimeTest polynomial_bump_test(int ix, int iy, double t_final) {
  if (ix < 0 || iy < 0) throw std::invalid_argument("test field: exponents must be nonnegative");
  if (!(t_final > 0.0)) throw std::invalid_argument("test field: horizon must be positive");
  const double a = std::acos(-1.0) / (2.0 * t_final);
  SpaceTimeTest phi;
  phi.value = [ix, iy, a](double x, double y, double t) {
    const double c = std::cos(a * t);
    return ipow(x, ix) * ipow(y, iy) * c * c;
  };
  phi.time_derivative = [ix, iy, a](double x, double y, double t) {
    return ipow(x, ix) * ipow(y, iy) * (-a * std::sin(2.0 * a * t));
  };
  phi.gradient = [ix, iy, a](double x, double y, double t) -> std::array<double, 2> {
    const double c = std::cos(a * t);
    const double ps = c * c;
    const double gx = ix > 0 ? static_cast<double>(ix) * ipow(x, ix - 1) * ipow(y, iy) * ps : 0.0;
    const double gy = iy > 0 ? static_cast<double>(iy) * ipow(x, ix) * ipow(y, iy - 1) * ps : 0.0;
    return {gx, gy};
  };
  return phi;
}

double renorm_residual(const Mesh& mesh, const TriangleRule& rule, const HeatSolution& sol,
                       const SourceFn& f, const SmoothClamp& s, const SpaceTimeTest& phi,
                       kernels::Exec exec) {
  if (!f) throw std::invalid_argument("renorm residual: source not set");
  if (!phi.value || !phi.time_derivative || !phi.gradient)
    throw std::invalid_argument("renorm residual: test field incomplete");
  if (sol.theta.size() < 2) throw std::invalid_argument("renorm residual: empty trajectory");

  const double t_final = sol.times.back();
  double phi_end = 0.0;
  double phi_start = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const auto& x = mesh.nodes[static_cast<std::size_t>(i)];
    phi_end = std::max(phi_end, std::abs(phi.value(x[0], x[1], t_final)));
    phi_start = std::max(phi_start, std::abs(phi.value(x[0], x[1], 0.0)));
  }
  if (phi_end > 1e-10 * (1.0 + phi_start))
    throw std::invalid_argument("renorm residual: test field must vanish at the final time");

  const std::size_t ne = static_cast<std::size_t>(mesh.n_elems());
  const std::size_t last = sol.theta.size() - 1;
  const double band = s.support();

  // Pairing with phi increments, left endpoint in S; telescopes exactly for
  // constant S.
  double pairing = 0.0;
  for (std::size_t n = 0; n < last; ++n) {
    const Eigen::VectorXd& th = sol.theta[n];
    const double t0 = sol.times[n];
    const double t1 = sol.times[n + 1];
    pairing += kernels::reduce_sum(ne, exec, [&](std::size_t e) {
      const double two_a = 2.0 * mesh.area[e];
      double acc = 0.0;
      for (std::size_t q = 0; q < rule.n; ++q) {
        const auto x = mesh.point(static_cast<int>(e), rule.pts[q].l1, rule.pts[q].l2);
        const double v = eval_p1(mesh, th, static_cast<int>(e), rule.pts[q].l1, rule.pts[q].l2);
        acc += rule.pts[q].w * two_a * s.s(v) *
               (phi.value(x[0], x[1], t1) - phi.value(x[0], x[1], t0));
      }
      return acc;
    });
  }

  const Eigen::VectorXd& th0 = sol.theta[0];
  const double initial = kernels::reduce_sum(ne, exec, [&](std::size_t e) {
    const double two_a = 2.0 * mesh.area[e];
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.n; ++q) {
      const auto x = mesh.point(static_cast<int>(e), rule.pts[q].l1, rule.pts[q].l2);
      const double v = eval_p1(mesh, th0, static_cast<int>(e), rule.pts[q].l1, rule.pts[q].l2);
      acc += rule.pts[q].w * two_a * s.s(v) * phi.value(x[0], x[1], 0.0);
    }
    return acc;
  });

  // Diffusion, renormalization, and source terms at right endpoints; the
  // gradient is masked to the clamp support.
  double bulk = 0.0;
  for (std::size_t n = 1; n <= last; ++n) {
    const Eigen::VectorXd& th = sol.theta[n];
    const double t = sol.times[n];
    double out[3];
    kernels::reduce_vec(
        ne, 3, exec,
        [&](std::size_t e, double* acc) {
          const auto g = grad_p1(mesh, th, static_cast<int>(e));
          const double two_a = 2.0 * mesh.area[e];
          for (std::size_t q = 0; q < rule.n; ++q) {
            const auto x = mesh.point(static_cast<int>(e), rule.pts[q].l1, rule.pts[q].l2);
            const double v =
                eval_p1(mesh, th, static_cast<int>(e), rule.pts[q].l1, rule.pts[q].l2);
            const double w = rule.pts[q].w * two_a;
            const double keep = std::abs(v) <= band ? 1.0 : 0.0;
            const double gx = keep * g[0];
            const double gy = keep * g[1];
            const double p = phi.value(x[0], x[1], t);
            const auto gp = phi.gradient(x[0], x[1], t);
            acc[0] += w * s.ds(v) * (gx * gp[0] + gy * gp[1]);
            acc[1] += w * s.dds(v) * (gx * gx + gy * gy) * p;
            acc[2] += w * f(x[0], x[1], t) * s.ds(v) * p;
          }
        },
        out);
    bulk += sol.dt * (out[0] + out[1] - out[2]);
  }

  return -pairing - initial + bulk;
}

TruncationEnergyReport truncation_energy(const HeatProblem& p, const TriangleRule& rule, double eps,
                                         const HeatSolution& sol, double level,
                                         kernels::Exec exec) {
  check_problem(p);
  if (!(level > 0.0)) throw std::invalid_argument("truncation energy: level must be positive");
  if (sol.theta.size() != static_cast<std::size_t>(p.steps) + 1)
    throw std::invalid_argument("truncation energy: trajectory does not match the problem grid");
  auto [f, theta0] = member_data(p, eps);
  const auto loads = step_loads(*p.mesh, rule, f, p.t_final, p.steps);

  const Eigen::VectorXd ml = lumped_mass_scalar(*p.mesh);
  const SpMat stiff = stiffness_scalar(*p.mesh, exec);

  TruncationEnergyReport rep;
  rep.level = level;

  double fed = 0.0;
  for (const auto& load : loads) fed += sol.dt * load.cwiseAbs().sum();
  rep.rhs = level * fed + level * ml.dot(theta0.cwiseAbs());

  rep.lhs_max = 0.0;
  rep.l2_margin = 0.0;
  double dissipated = 0.0;
  for (std::size_t n = 0; n < sol.theta.size(); ++n) {
    const Eigen::VectorXd& th = sol.theta[n];
    const Eigen::VectorXd tr = nodal_truncate(level, th);
    double stored = 0.0;
    double sq = 0.0;
    for (int i = 0; i < th.size(); ++i) {
      stored += ml[i] * tilde_truncate(level, th[i]);
      sq += ml[i] * tr[i] * tr[i];
    }
    if (n > 0) dissipated += sol.dt * tr.dot(stiff * tr);
    const double lhs = stored + dissipated;
    const double l2 = 2.0 * stored - sq;
    if (n == 0) {
      rep.lhs_max = lhs;
      rep.l2_margin = l2;
    } else {
      rep.lhs_max = std::max(rep.lhs_max, lhs);
      rep.l2_margin = std::min(rep.l2_margin, l2);
    }
  }
  rep.margin = rep.rhs - rep.lhs_max;
  return rep;
}

CauchyReport cauchy_bound(const HeatProblem& p, const TriangleRule& rule, double eps_a,
                          double eps_b, kernels::Exec exec) {
  check_problem(p);
  auto [fa, tha] = member_data(p, eps_a);
  auto [fb, thb] = member_data(p, eps_b);
  const auto loads_a = step_loads(*p.mesh, rule, fa, p.t_final, p.steps);
  const auto loads_b = step_loads(*p.mesh, rule, fb, p.t_final, p.steps);
  const HeatSolution sa = run_steps(*p.mesh, tha, loads_a, p.t_final, p.steps, exec);
  const HeatSolution sb = run_steps(*p.mesh, thb, loads_b, p.t_final, p.steps, exec);

  const Eigen::VectorXd ml = lumped_mass_scalar(*p.mesh);
  CauchyReport rep;
  for (std::size_t n = 0; n < sa.theta.size(); ++n)
    rep.lhs = std::max(rep.lhs, ml.dot((sa.theta[n] - sb.theta[n]).cwiseAbs()));
  double feed = 0.0;
  for (int n = 0; n < p.steps; ++n)
    feed += sa.dt * (loads_a[static_cast<std::size_t>(n)] - loads_b[static_cast<std::size_t>(n)])
                        .cwiseAbs()
                        .sum();
  rep.rhs = feed + ml.dot((tha - thb).cwiseAbs());
  rep.margin = rep.rhs - rep.lhs;
  return rep;
}

double comparison_gap(const Mesh& mesh, const TriangleRule& rule, const SourceFn& f1,
                      const Eigen::VectorXd& theta01, const SourceFn& f2,
                      const Eigen::VectorXd& theta02, double t_final, int steps,
                      kernels::Exec exec) {
  if (!f1 || !f2) throw std::invalid_argument("comparison: sources not set");
  if (theta01.size() != mesh.n_nodes() || theta02.size() != mesh.n_nodes())
    throw std::invalid_argument("comparison: initial datum size mismatch");
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (theta01[i] > theta02[i])
      throw std::invalid_argument("comparison: initial data are not ordered");
  for (int n = 1; n <= steps; ++n) {
    const double t = t_final * static_cast<double>(n) / static_cast<double>(steps);
    for (int e = 0; e < mesh.n_elems(); ++e)
      for (std::size_t q = 0; q < rule.n; ++q) {
        const auto x = mesh.point(e, rule.pts[q].l1, rule.pts[q].l2);
        if (f1(x[0], x[1], t) > f2(x[0], x[1], t))
          throw std::invalid_argument("comparison: sources are not ordered");
      }
  }

  const auto loads_1 = step_loads(mesh, rule, f1, t_final, steps);
  const auto loads_2 = step_loads(mesh, rule, f2, t_final, steps);
  const HeatSolution s1 = run_steps(mesh, theta01, loads_1, t_final, steps, exec);
  const HeatSolution s2 = run_steps(mesh, theta02, loads_2, t_final, steps, exec);

  double gap = (s2.theta[0] - s1.theta[0]).minCoeff();
  for (std::size_t n = 1; n < s1.theta.size(); ++n)
    gap = std::min(gap, (s2.theta[n] - s1.theta[n]).minCoeff());
  return gap;
}

}  // namespace tvesim
