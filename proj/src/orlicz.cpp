#include "tvesim/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace tvesim {

namespace {

bool finite(double v) { return std::isfinite(v); }

void require_finite_field(const SlabField& f) {
  for (const auto& slab : f.slabs)
    for (const auto& t : slab)
      for (double v : t.a)
        if (!finite(v)) throw std::invalid_argument("orlicz: non-finite field value");
}

double max_abs(const SlabField& f) {
  double m = 0.0;
  for (const auto& slab : f.slabs)
    for (const auto& t : slab)
      for (double v : t.a) m = std::max(m, std::abs(v));
  return m;
}

// Exact integral of A : B over one slab of piecewise-constant fields.
double f_weighted_dot(const std::vector<SymTensor3>& a, const std::vector<SymTensor3>& b, double w,
                      const Mesh& mesh) {
  if (static_cast<int>(a.size()) != mesh.n_elems() || a.size() != b.size())
    throw std::invalid_argument("orlicz: field size does not match the mesh");
  double s = 0.0;
  for (std::size_t e = 0; e < a.size(); ++e) s += mesh.area[e] * ddot(a[e], b[e]);
  return w * s;
}

}  // namespace

double RadialGrid::point(int i) const {
  const double lr = std::log(rmin) + (std::log(rmax) - std::log(rmin)) * i / (n - 1);
  return std::exp(lr);
}

double RadialGrid::ratio() const { return std::exp((std::log(rmax) - std::log(rmin)) / (n - 1)); }

NFunction NFunction::power_constant(double p) {
  if (!(p > 1.0) || !finite(p)) throw std::invalid_argument("NFunction: exponent must satisfy p > 1");
  NFunction f;
  f.power_ = true;
  f.const_p_ = true;
  f.p0_ = p;
  f.p_min_ = f.p_max_ = p;
  return f;
}

NFunction NFunction::power(const Expression& p, double lx, double ly) {
  NFunction f;
  f.power_ = true;
  f.const_p_ = !p.uses(ExprVar::x) && !p.uses(ExprVar::y);
  f.p_expr_ = p;
  // exponent bounds from a 65 x 65 sample lattice over the domain box
  double pmin = std::numeric_limits<double>::infinity();
  double pmax = -pmin;
  for (int j = 0; j <= 64; ++j)
    for (int i = 0; i <= 64; ++i) {
      EvalContext c;
      c.x = lx * i / 64.0;
      c.y = ly * j / 64.0;
      const double v = p.eval(c);
      if (!finite(v)) throw std::invalid_argument("NFunction: exponent field not finite");
      pmin = std::min(pmin, v);
      pmax = std::max(pmax, v);
    }
  if (!(pmin > 1.0)) throw std::invalid_argument("NFunction: exponent field must stay above 1");
  f.p_min_ = pmin;
  f.p_max_ = pmax;
  if (f.const_p_) f.p0_ = pmin;
  return f;
}

NFunction NFunction::radial(const Expression& m) {
  NFunction f;
  f.power_ = false;
  f.m_expr_ = m;
  return f;
}

double NFunction::exponent(double x, double y) const {
  if (!power_) throw std::logic_error("NFunction: exponent queried on non-power family");
  if (const_p_) return p0_;
  EvalContext c;
  c.x = x;
  c.y = y;
  return p_expr_.eval(c);
}

double NFunction::radial_eval(double x, double y, double r) const {
  const double ar = std::abs(r);
  if (power_) {
    const double p = exponent(x, y);
    return ar == 0.0 ? 0.0 : std::pow(ar, p) / p;
  }
  EvalContext c;
  c.x = x;
  c.y = y;
  c.r = ar;
  return m_expr_.eval(c);
}

double NFunction::eval(double x, double y, const SymTensor3& xi) const {
  return radial_eval(x, y, tnorm(xi));
}

double radial_legendre(const std::function<double(double)>& m, const RadialGrid& grid, double s) {
  if (!(s > 0.0)) return 0.0;  // sup attained at r = 0 when the slope is non-positive
  auto obj = [&](double r) { return s * r - m(r); };

  // coarse scan over {0} and the grid
  double best_r = 0.0;
  double best = 0.0;
  int best_i = -1;
  for (int i = 0; i < grid.n; ++i) {
    const double r = grid.point(i);
    const double v = obj(r);
    if (v > best) {
      best = v;
      best_r = r;
      best_i = i;
    }
  }

  double lo = 0.0, hi = 0.0;
  if (best_i < 0) {
    lo = 0.0;
    hi = grid.point(0);
  } else if (best_i == grid.n - 1) {
    // maximizer beyond the grid: expand geometrically until the objective drops
    lo = grid.point(best_i - 1);
    double r = best_r;
    double ratio = grid.ratio();
    int guard = 0;
    for (;;) {
      const double rn = r * ratio;
      if (!(rn < 1e300) || ++guard > 4096) {
        hi = r;
        break;
      }
      if (obj(rn) <= obj(r)) {
        hi = rn;
        break;
      }
      r = rn;
    }
  } else {
    lo = best_i == 0 ? 0.0 : grid.point(best_i - 1);
    hi = grid.point(best_i + 1);
  }

  // golden section on the bracket; the objective is concave for convex m
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = obj(c), fd = obj(d);
  for (int it = 0; it < 160 && (b - a) > 1e-14 * (std::abs(b) + 1e-300); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = obj(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = obj(d);
    }
  }
  return std::max({best, fc, fd, 0.0});
}

ComplementaryNFunction ComplementaryNFunction::of(const NFunction& m, const RadialGrid& grid) {
  ComplementaryNFunction c;
  c.closed_ = m.is_power();
  c.base_ = m;
  c.grid_ = grid;
  return c;
}

double ComplementaryNFunction::radial_eval(double x, double y, double s) const {
  const double as = std::abs(s);
  if (closed_) {
    const double p = base_.exponent(x, y);
    const double q = p / (p - 1.0);
    return as == 0.0 ? 0.0 : std::pow(as, q) / q;
  }
  return radial_legendre([&](double r) { return base_.radial_eval(x, y, r); }, grid_, as);
}

double ComplementaryNFunction::eval(double x, double y, const SymTensor3& eta) const {
  return radial_eval(x, y, tnorm(eta));
}

SlabField SlabField::space(std::vector<SymTensor3> values) {
  SlabField f;
  f.slabs.push_back(std::move(values));
  f.weight.push_back(1.0);
  return f;
}

namespace {

template <typename NFn>
double modular_qp_impl(const NFn& m, const Mesh& mesh, const TriangleRule& rule, const QpTensorFn& f,
                       kernels::Exec exec) {
  const std::size_t ne = static_cast<std::size_t>(mesh.n_elems());
  return kernels::reduce_sum(ne, exec, [&](std::size_t e) {
    const int ei = static_cast<int>(e);
    const double a2 = 2.0 * mesh.area[e];
    double s = 0.0;
    for (std::size_t q = 0; q < rule.n; ++q) {
      const auto& qp = rule.pts[q];
      const auto x = mesh.point(ei, qp.l1, qp.l2);
      s += a2 * qp.w * m.eval(x[0], x[1], f(ei, static_cast<int>(q), x[0], x[1]));
    }
    return s;
  });
}

template <typename NFn>
double modular_slab_impl(const NFn& m, const SlabField& f, const Mesh& mesh, const TriangleRule& rule,
                         kernels::Exec exec) {
  require_finite_field(f);
  if (f.slabs.size() != f.weight.size())
    throw std::invalid_argument("orlicz: slab/weight count mismatch");
  double total = 0.0;
  for (std::size_t s = 0; s < f.slabs.size(); ++s) {
    const auto& slab = f.slabs[s];
    if (static_cast<int>(slab.size()) != mesh.n_elems())
      throw std::invalid_argument("orlicz: field size does not match the mesh");
    total += f.weight[s] * modular_qp_impl(
                               m, mesh, rule,
                               [&slab](int e, int, double, double) { return slab[static_cast<std::size_t>(e)]; },
                               exec);
  }
  return total;
}

template <typename NFn>
double luxemburg_impl(const NFn& m, const SlabField& f, const Mesh& mesh, const TriangleRule& rule,
                      kernels::Exec exec) {
  require_finite_field(f);
  if (max_abs(f) == 0.0) return 0.0;

  auto scaled_modular = [&](double lambda) {
    SlabField g = f;
    const double inv = 1.0 / lambda;
    for (auto& slab : g.slabs)
      for (auto& t : slab) t *= inv;
    return modular_slab_impl(m, g, mesh, rule, exec);
  };

  double hi = 1.0;
  int guard = 0;
  while (scaled_modular(hi) > 1.0) {
    hi *= 2.0;
    if (++guard > 2048) throw std::runtime_error("luxemburg_norm: bracket search diverged");
  }
  double lo = hi * 0.5;
  while (scaled_modular(lo) <= 1.0) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-300) return 0.0;
  }
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (scaled_modular(mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

double modular(const NFunction& m, const SlabField& f, const Mesh& mesh, const TriangleRule& rule,
               kernels::Exec exec) {
  return modular_slab_impl(m, f, mesh, rule, exec);
}

double modular(const ComplementaryNFunction& m, const SlabField& f, const Mesh& mesh,
               const TriangleRule& rule, kernels::Exec exec) {
  return modular_slab_impl(m, f, mesh, rule, exec);
}

double modular_qp(const NFunction& m, const Mesh& mesh, const TriangleRule& rule, const QpTensorFn& f,
                  kernels::Exec exec) {
  return modular_qp_impl(m, mesh, rule, f, exec);
}

double modular_qp(const ComplementaryNFunction& m, const Mesh& mesh, const TriangleRule& rule,
                  const QpTensorFn& f, kernels::Exec exec) {
  return modular_qp_impl(m, mesh, rule, f, exec);
}

double luxemburg_norm(const NFunction& m, const SlabField& f, const Mesh& mesh,
                      const TriangleRule& rule, kernels::Exec exec) {
  return luxemburg_impl(m, f, mesh, rule, exec);
}

double luxemburg_norm(const ComplementaryNFunction& m, const SlabField& f, const Mesh& mesh,
                      const TriangleRule& rule, kernels::Exec exec) {
  return luxemburg_impl(m, f, mesh, rule, exec);
}

double orlicz_norm(const NFunction& m, const SlabField& f, const Mesh& mesh, const TriangleRule& rule,
                   kernels::Exec exec) {
  require_finite_field(f);
  if (max_abs(f) == 0.0) return 0.0;

  auto amemiya = [&](double k) {
    SlabField g = f;
    for (auto& slab : g.slabs)
      for (auto& t : slab) t *= k;
    const double rho = modular_slab_impl(m, g, mesh, rule, exec);
    return finite(rho) ? (1.0 + rho) / k : std::numeric_limits<double>::infinity();
  };

  // The minimizer sits near 1 / ||f||_L; search log k by golden section.
  const double lux = luxemburg_impl(m, f, mesh, rule, exec);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(1.0 / lux) - 14.0;
  double b = std::log(1.0 / lux) + 14.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = amemiya(std::exp(c)), fd = amemiya(std::exp(d));
  for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = amemiya(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = amemiya(std::exp(d));
    }
  }
  return std::min(fc, fd);
}

ModularReport modular_report(const NFunction& m, const SlabField& f, const Mesh& mesh,
                             const TriangleRule& rule, kernels::Exec exec) {
  ModularReport r;
  r.modular = modular(m, f, mesh, rule, exec);
  r.luxemburg = luxemburg_norm(m, f, mesh, rule, exec);
  r.orlicz = orlicz_norm(m, f, mesh, rule, exec);
  return r;
}

double fenchel_young_gap(const NFunction& m, const ComplementaryNFunction& ms, double x, double y,
                         const SymTensor3& xi, const SymTensor3& eta) {
  return m.eval(x, y, xi) + ms.eval(x, y, eta) - ddot(xi, eta);
}

Delta2Report check_delta2(const NFunction& m, const RadialGrid& grid,
                          const std::vector<std::array<double, 2>>& xs) {
  Delta2Report rep;
  // 2r must stay on the evaluable range, so stop one doubling short of rmax.
  const int top = grid.n - 1;
  std::vector<double> worst_ratio(static_cast<std::size_t>(grid.n), 0.0);
  for (const auto& x : xs) {
    for (int i = 0; i < top; ++i) {
      const double r = grid.point(i);
      if (2.0 * r > grid.rmax) break;
      const double mr = m.radial_eval(x[0], x[1], r);
      if (!(mr > 1e-300) || !finite(mr)) continue;
      const double m2r = m.radial_eval(x[0], x[1], 2.0 * r);
      if (!finite(m2r)) {
        // doubling overflowed while m(r) stayed finite: unbounded growth
        rep.holds = false;
        if (finite(rep.c)) {
          rep.c = std::numeric_limits<double>::infinity();
          rep.worst_r = r;
        }
        continue;
      }
      const double ratio = m2r / mr;
      worst_ratio[static_cast<std::size_t>(i)] = std::max(worst_ratio[static_cast<std::size_t>(i)], ratio);
      if (ratio > rep.c) {
        rep.c = ratio;
        rep.worst_r = r;
      }
    }
  }
  // Growth certificate: if the ratio keeps climbing over the top decade the
  // doubling constant is not bounded on the sampled range.
  int last = top - 1;
  while (last > 0 && worst_ratio[static_cast<std::size_t>(last)] == 0.0) --last;
  const int decade = std::max(1, grid.n / 8);
  const int mid = std::max(0, last - decade);
  if (worst_ratio[static_cast<std::size_t>(last)] > 1.02 * worst_ratio[static_cast<std::size_t>(mid)] &&
      rep.worst_r >= grid.point(mid)) {
    rep.holds = false;
  }
  return rep;
}

HolderReport holder_check(const NFunction& m, const ComplementaryNFunction& ms, const SlabField& a,
                          const SlabField& b, const Mesh& mesh, const TriangleRule& rule,
                          kernels::Exec exec) {
  if (a.slabs.size() != b.slabs.size())
    throw std::invalid_argument("holder_check: slab count mismatch");
  HolderReport rep;
  double integral = 0.0;
  for (std::size_t s = 0; s < a.slabs.size(); ++s) {
    const auto& sa = a.slabs[s];
    const auto& sb = b.slabs[s];
    integral += f_weighted_dot(sa, sb, a.weight[s], mesh);
  }
  rep.integral = std::abs(integral);
  rep.norm_a = luxemburg_norm(m, a, mesh, rule, exec);
  rep.norm_b = luxemburg_norm(ms, b, mesh, rule, exec);
  rep.margin = 2.0 * rep.norm_a * rep.norm_b - rep.integral;
  return rep;
}

AxiomReport check_axioms(const NFunction& m, const std::vector<std::array<double, 2>>& xs,
                         unsigned long long seed) {
  AxiomReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> comp(-1.0, 1.0);
  std::uniform_real_distribution<double> mag(-3.0, 3.0);

  rep.slope_zero = 0.0;
  rep.slope_inf = std::numeric_limits<double>::infinity();
  for (const auto& x : xs) {
    if (std::abs(m.radial_eval(x[0], x[1], 0.0)) > 0.0) rep.zero_ok = false;
    if (!(m.radial_eval(x[0], x[1], 1.0) > 0.0)) rep.zero_ok = false;
    rep.slope_zero = std::max(rep.slope_zero, m.radial_eval(x[0], x[1], 1e-6) / 1e-6);
    rep.slope_inf = std::min(rep.slope_inf, m.radial_eval(x[0], x[1], 1e6) / 1e6);

    for (int trial = 0; trial < 64; ++trial) {
      SymTensor3 xi, eta;
      const double sx = std::pow(10.0, mag(rng));
      const double sy = std::pow(10.0, mag(rng));
      for (int i = 0; i < 6; ++i) {
        xi[static_cast<std::size_t>(i)] = sx * comp(rng);
        eta[static_cast<std::size_t>(i)] = sy * comp(rng);
      }
      const double mx = m.eval(x[0], x[1], xi);
      const double mxn = m.eval(x[0], x[1], -1.0 * xi);
      if (std::abs(mx - mxn) > 1e-12 * (1.0 + std::abs(mx))) rep.even_ok = false;
      const double mid = m.eval(x[0], x[1], 0.5 * (xi + eta));
      const double avg = 0.5 * (mx + m.eval(x[0], x[1], eta));
      if (mid > avg + 1e-12 * (1.0 + avg)) rep.convex_ok = false;
    }
  }
  return rep;
}

}  // namespace tvesim
