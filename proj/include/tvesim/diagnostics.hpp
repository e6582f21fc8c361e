#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "tvesim/evolution.hpp"

namespace tvesim {

// Coefficient-space potential energy (1/2)|delta|^2; with D-orthonormal
// complement modes this equals the stored-strain integral.
double potential_energy(const Eigen::VectorXd& delta);

// The same quantity by element quadrature of (1/2) D e : e with
// e = sum_m delta_m zeta_m; agreement with the coefficient path certifies the
// Gram structure of the basis.
double potential_energy_quadrature(const Mesh& mesh, const MaterialField& mat,
                                   const TriangleRule& rule, const ComplementBasis& comp,
                                   const Eigen::VectorXd& delta);

// Orthogonality of the Galerkin stress to every displacement strain:
// residual = max_n |int D(sum delta zeta) : eps(w_n)|. The stress L2 norm
// scales the pass threshold.
struct EquilibriumReport {
  double residual = 0.0;
  double stress_l2 = 0.0;
  bool pass = false;
};

EquilibriumReport equilibrium_residual(const Mesh& mesh, const MaterialField& mat,
                                       const TriangleRule& rule, const DispBasis& disp,
                                       const ComplementBasis& comp, const Eigen::VectorXd& delta);

// Max over stored times of |E(t) - E(0) + int_0^t galerkin power|, with the
// energy scale for relative comparisons.
struct IdentityReport {
  double residual = 0.0;
  double scale = 1.0;
};

IdentityReport energy_identity(const Trajectory& traj);

// Dissipation budget: for every stored time,
//   E(t) + c <M(stress)>_t + ((2c - d)/2) <M*(flow)>_t
//     <= E(0) + <M((2/d) lifting stress)>_T,  d = min(1, c).
// The right side is the budget constant; margins are budget minus the left
// side per stored time.
struct EnergyReport {
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<double> cumulative_dissipation;  // trapezoid of int G : stress
  std::vector<double> modular_stress;          // <M(stress)>_t
  std::vector<double> modular_flow;            // <M*(flow)>_t
  double budget = 0.0;
  std::vector<double> margins;
  double min_margin = 0.0;
  bool pass = false;
};

EnergyReport energy_budget(const Trajectory& traj, double c);

// Weighted dissipation probe: lhs = int psi_{mu,tau} galerkin_power dt with
// psi = 1 on [0,tau], falling linearly to 0 on [tau, tau+mu]. The continuum
// identity lhs = E(0) - (1/mu) int_tau^{tau+mu} E makes the defect a pure
// time-discretization error.
struct PsiProbe {
  double lhs = 0.0;
  double average_energy = 0.0;  // (1/mu) int_tau^{tau+mu} E
  double defect = 0.0;
};

PsiProbe psi_probe(const Trajectory& traj, double mu, double tau);

// Accumulator cross-checks: the product L1 never exceeds the modular sum
// (integrated Fenchel-Young), and under the quadratic-comparison gate the
// conjugate modular of the flow stays below its squared L2 norm.
struct OrliczAudit {
  double product_l1 = 0.0;
  double modular_stress = 0.0;
  double modular_flow = 0.0;
  double flow_l2 = 0.0;        // int_Q |G|^2
  double fy_margin = 0.0;      // min_t of modular sum minus product L1
  double conjugate_margin = 0.0;  // min_t of flow L2 minus conjugate modular
  bool fy_pass = false;
};

OrliczAudit audit_orlicz(const Trajectory& traj);

// Largest lumped L1 norm of the Galerkin temperature over stored times.
double max_theta_l1(const Trajectory& traj);

// One record per check; rendered to a JSON report by format_report.
struct CheckRecord {
  std::string name;
  std::vector<double> values;
  double margin = 0.0;
  bool pass = false;
};

std::string format_report(const std::vector<CheckRecord>& checks);

}  // namespace tvesim
