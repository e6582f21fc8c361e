#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

#include "tvesim/fem.hpp"
#include "tvesim/kernels.hpp"
#include "tvesim/mesh.hpp"
#include "tvesim/quadrature.hpp"
#include "tvesim/truncation.hpp"

namespace tvesim {

// Scalar heat source over space-time.
using SourceFn = std::function<double(double, double, double)>;  // (x, y, t)

// Nodal implicit Euler trajectory of theta_t - Laplace theta = f with
// homogeneous Neumann condition, lumped mass. The lumped matrix keeps the
// update an M-matrix system on nonobtuse meshes, which the comparison and
// truncation-energy inequalities below rely on.
struct HeatSolution {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> theta;
  double mass_residual = 0.0;  // worst per-step relative mass balance defect

  const Eigen::VectorXd& at_step(int n) const { return theta[static_cast<std::size_t>(n)]; }
};

// Data family indexed by a regularization parameter: square-integrable
// approximants of an integrable-only target source and initial datum.
struct HeatProblem {
  const Mesh* mesh = nullptr;
  double t_final = 1.0;
  int steps = 1;
  std::function<SourceFn(double)> source;          // eps -> f^eps
  std::function<Eigen::VectorXd(double)> initial;  // eps -> nodal theta0^eps
};

// Family obtained by level-(1/eps) truncation of fixed target data.
HeatProblem truncated_data_problem(const Mesh& mesh, double t_final, int steps, SourceFn target,
                                   Eigen::VectorXd theta0);

// amp |x - x0|^{-a}; integrable but not square-integrable in 2-D for
// 1 <= a < 2, which is enforced.
SourceFn singular_source(double amp, std::array<double, 2> x0, double a);

struct FamilyReport {
  std::vector<double> source_l1;     // per eps, integral of |f^eps| over space-time
  double target_l1 = 0.0;            // same quadrature applied to the largest level
  std::vector<double> initial_gaps;  // successive lumped L1 distances of theta0^eps
  bool source_bounded = false;       // every member below target_l1 + round-off
  bool initial_converging = false;   // gaps nonincreasing
};

FamilyReport check_family(const HeatProblem& p, const TriangleRule& rule,
                          const std::vector<double>& eps,
                          kernels::Exec exec = kernels::Exec::parallel);

HeatSolution solve_truncated(const HeatProblem& p, const TriangleRule& rule, double eps,
                             kernels::Exec exec = kernels::Exec::parallel);

// L2(0,T; W^{1,2}) norm of T_{k+c}(theta) - T_k(theta) by element quadrature;
// the gradient is the elementwise P1 gradient masked to {k <= |theta| < k+c}.
double truncation_tail(const Mesh& mesh, const TriangleRule& rule, const HeatSolution& sol,
                       double k, double c, kernels::Exec exec = kernels::Exec::parallel);

// Smoothed clamp for the renormalization identity: S' is the C-infinity bump
// exp(1 - 1/(1 - (r/m)^2)) on (-m, m), S its tabulated odd antiderivative,
// S'' analytic. The degenerate constant member has S' = S'' = 0.
class SmoothClamp {
 public:
  explicit SmoothClamp(double m);
  static SmoothClamp constant(double c);

  double s(double r) const;
  double ds(double r) const;
  double dds(double r) const;
  double support() const { return m_; }

 private:
  SmoothClamp() = default;

  double m_ = 0.0;
  double c_ = 0.0;
  bool const_ = false;
  std::vector<double> table_;  // S on [0, m], uniform grid
  double tail_ = 0.0;          // S(m), the saturated value
};

// Smooth space-time test data with analytic derivatives.
struct SpaceTimeTest {
  std::function<double(double, double, double)> value;
  std::function<double(double, double, double)> time_derivative;
  std::function<std::array<double, 2>(double, double, double)> gradient;
};

// x^ix y^iy cos^2(pi t / (2 T)): polynomial in space, vanishing at t = T.
SpaceTimeTest polynomial_bump_test(int ix, int iy, double t_final);

// Renormalization residual
//   -int S(theta) phi_t - int S(theta0) phi(0) + int S'(theta) grad theta . grad phi
//   + int S''(theta) |grad theta|^2 phi - int f S'(theta) phi
// with grad theta masked to {|theta| <= support(S)}. The time derivative term
// is assembled as a telescoping sum of exact phi increments so a constant S
// gives a zero residual identically. phi must vanish at the final time.
double renorm_residual(const Mesh& mesh, const TriangleRule& rule, const HeatSolution& sol,
                       const SourceFn& f, const SmoothClamp& s, const SpaceTimeTest& phi,
                       kernels::Exec exec = kernels::Exec::parallel);

// Discrete counterpart of testing the equation with T_k(theta): for each n,
//   sum_i m_i tilde_T_k(theta^n) + sum_{j<=n} dt <K T_k(theta^j), T_k(theta^j)>
//     <= k sum_j dt sum_i |F^j_i| + k sum_i m_i |theta^0_i|.
struct TruncationEnergyReport {
  double level = 0.0;
  double lhs_max = 0.0;
  double rhs = 0.0;
  double margin = 0.0;     // rhs - lhs_max, nonnegative up to solver round-off
  double l2_margin = 0.0;  // min over t of 2 int tilde_T - |T_k|^2 (lumped), >= 0
};

TruncationEnergyReport truncation_energy(const HeatProblem& p, const TriangleRule& rule, double eps,
                                         const HeatSolution& sol, double level,
                                         kernels::Exec exec = kernels::Exec::parallel);

// Contraction bound for two family members:
//   max_n |theta^a - theta^b|_{L1} <= sum_j dt sum_i |F^a_i - F^b_i| + |theta0^a - theta0^b|_{L1}.
struct CauchyReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
};

CauchyReport cauchy_bound(const HeatProblem& p, const TriangleRule& rule, double eps_a,
                          double eps_b, kernels::Exec exec = kernels::Exec::parallel);

// Order preservation: requires theta0_1 <= theta0_2 nodally and f1 <= f2 at
// every quadrature point of the time grid, then returns the minimum of
// theta_2 - theta_1 over all nodes and times (nonnegative up to round-off).
double comparison_gap(const Mesh& mesh, const TriangleRule& rule, const SourceFn& f1,
                      const Eigen::VectorXd& theta01, const SourceFn& f2,
                      const Eigen::VectorXd& theta02, double t_final, int steps,
                      kernels::Exec exec = kernels::Exec::parallel);

}  // namespace tvesim
