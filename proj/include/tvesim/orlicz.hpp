#pragma once

#include <array>
#include <functional>
#include <vector>

#include "tvesim/expression.hpp"
#include "tvesim/kernels.hpp"
#include "tvesim/mesh.hpp"
#include "tvesim/quadrature.hpp"
#include "tvesim/tensor.hpp"

namespace tvesim {

// Logarithmic radial grid used by the numeric Legendre transform and the
// growth checks.
struct RadialGrid {
  double rmin = 1e-8;
  double rmax = 1e8;
  int n = 2048;

  double point(int i) const;
  double ratio() const;
};

// Anisotropic N-function M(x, xi) = m(x, |xi|) with a radial profile that is
// convex, vanishes only at zero, and is superlinear at infinity. Two shipped
// families: the variable-exponent power profile |xi|^p(x) / p(x) and a
// user-supplied radial profile m(x, r) given as an expression over (x, y, r).
class NFunction {
 public:
  static NFunction power_constant(double p);
  // p(x, y) as an expression; bounds are sampled over [0,lx] x [0,ly] and
  // must satisfy 1 < p_min <= p_max < infinity.
  static NFunction power(const Expression& p, double lx, double ly);
  static NFunction radial(const Expression& m);

  double eval(double x, double y, const SymTensor3& xi) const;
  double radial_eval(double x, double y, double r) const;

  bool is_power() const { return power_; }
  double exponent(double x, double y) const;  // power family only
  double p_min() const { return p_min_; }
  double p_max() const { return p_max_; }

 private:
  bool power_ = true;
  bool const_p_ = true;
  double p0_ = 2.0;
  Expression p_expr_;
  Expression m_expr_;
  double p_min_ = 2.0, p_max_ = 2.0;
};

// Complementary N-function M*(x, eta) = sup_xi (xi : eta - M(x, xi)). Closed
// form for the power family; otherwise the sup is taken over the radial grid
// and refined by golden section, expanding past the last grid point when the
// maximizer falls on it.
class ComplementaryNFunction {
 public:
  static ComplementaryNFunction of(const NFunction& m, const RadialGrid& grid);

  double eval(double x, double y, const SymTensor3& eta) const;
  double radial_eval(double x, double y, double s) const;
  bool closed_form() const { return closed_; }

 private:
  bool closed_ = true;
  NFunction base_;
  RadialGrid grid_;
};

// sup_{r >= 0} (s r - m(r)) for a one-dimensional convex profile; shared by
// the numeric conjugate and the biconjugation checks.
double radial_legendre(const std::function<double(double)>& m, const RadialGrid& grid, double s);

// Piecewise-constant tensor field per element, one slab per time interval.
// weight holds the slab durations; a single slab of weight 1 is a pure space
// field.
struct SlabField {
  std::vector<std::vector<SymTensor3>> slabs;
  std::vector<double> weight;

  static SlabField space(std::vector<SymTensor3> values);
};

// Integrand samplers get (element, quadrature index, x, y).
using QpTensorFn = std::function<SymTensor3(int, int, double, double)>;

// Modular rho(f) = integral of M(x, f) over the space(-time) grid.
double modular(const NFunction& m, const SlabField& f, const Mesh& mesh, const TriangleRule& rule,
               kernels::Exec exec = kernels::Exec::parallel);
double modular(const ComplementaryNFunction& m, const SlabField& f, const Mesh& mesh,
               const TriangleRule& rule, kernels::Exec exec = kernels::Exec::parallel);
double modular_qp(const NFunction& m, const Mesh& mesh, const TriangleRule& rule, const QpTensorFn& f,
                  kernels::Exec exec = kernels::Exec::parallel);
double modular_qp(const ComplementaryNFunction& m, const Mesh& mesh, const TriangleRule& rule,
                  const QpTensorFn& f, kernels::Exec exec = kernels::Exec::parallel);

// Luxemburg norm inf{lambda > 0 : rho(f / lambda) <= 1} by bisection to
// relative bracket width 1e-10; exact zero for the zero field.
double luxemburg_norm(const NFunction& m, const SlabField& f, const Mesh& mesh,
                      const TriangleRule& rule, kernels::Exec exec = kernels::Exec::parallel);
double luxemburg_norm(const ComplementaryNFunction& m, const SlabField& f, const Mesh& mesh,
                      const TriangleRule& rule, kernels::Exec exec = kernels::Exec::parallel);

// Orlicz norm in Amemiya form inf_{k > 0} (1 + rho(k f)) / k.
double orlicz_norm(const NFunction& m, const SlabField& f, const Mesh& mesh, const TriangleRule& rule,
                   kernels::Exec exec = kernels::Exec::parallel);

struct ModularReport {
  double modular = 0.0;
  double luxemburg = 0.0;
  double orlicz = 0.0;
};

ModularReport modular_report(const NFunction& m, const SlabField& f, const Mesh& mesh,
                             const TriangleRule& rule, kernels::Exec exec = kernels::Exec::parallel);

// Pointwise Fenchel-Young gap M(x, xi) + M*(x, eta) - xi : eta (>= 0).
double fenchel_young_gap(const NFunction& m, const ComplementaryNFunction& ms, double x, double y,
                         const SymTensor3& xi, const SymTensor3& eta);

struct Delta2Report {
  double c = 0.0;       // sup of m(x, 2r) / m(x, r) over the sampled grid
  double h = 0.0;       // additive slack; zero for the shipped families
  bool holds = true;    // false when the ratio keeps growing toward rmax
  double worst_r = 0.0;
};

Delta2Report check_delta2(const NFunction& m, const RadialGrid& grid,
                          const std::vector<std::array<double, 2>>& xs);

struct HolderReport {
  double integral = 0.0;  // |integral of A : B|
  double norm_a = 0.0;    // Luxemburg norm of A in M
  double norm_b = 0.0;    // Luxemburg norm of B in M*
  double margin = 0.0;    // 2 norm_a norm_b - integral
};

HolderReport holder_check(const NFunction& m, const ComplementaryNFunction& ms, const SlabField& a,
                          const SlabField& b, const Mesh& mesh, const TriangleRule& rule,
                          kernels::Exec exec = kernels::Exec::parallel);

struct AxiomReport {
  bool zero_ok = true;       // m(x, 0) = 0 and m > 0 away from zero
  bool even_ok = true;       // M(x, xi) = M(x, -xi)
  bool convex_ok = true;     // midpoint convexity along sampled tensor pairs
  double slope_zero = 0.0;   // m(x, r) / r at r = 1e-6 (should be small)
  double slope_inf = 0.0;    // m(x, r) / r at r = 1e6 (should be large)
  bool ok() const { return zero_ok && even_ok && convex_ok && slope_zero < 1e-2 && slope_inf > 1e2; }
};

AxiomReport check_axioms(const NFunction& m, const std::vector<std::array<double, 2>>& xs,
                         unsigned long long seed);

}  // namespace tvesim
