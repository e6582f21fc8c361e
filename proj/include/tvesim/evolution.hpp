#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "tvesim/bases.hpp"
#include "tvesim/constitutive.hpp"
#include "tvesim/lifting.hpp"
#include "tvesim/orlicz.hpp"
#include "tvesim/truncation.hpp"

namespace tvesim {

// Coupled Galerkin coefficients. The displacement and plastic-strain modes
// share gamma by construction, so it is stored once.
struct State {
  double t = 0.0;
  Eigen::VectorXd gamma;  // displacement / shared plastic coefficients
  Eigen::VectorXd delta;  // complement plastic coefficients
  Eigen::VectorXd beta;   // temperature coefficients

  bool finite() const {
    return gamma.allFinite() && delta.allFinite() && beta.allFinite() && std::isfinite(t);
  }
};

struct Derivative {
  Eigen::VectorXd gamma_dot;
  Eigen::VectorXd delta_dot;
  Eigen::VectorXd beta_dot;  // includes the linear decay term
};

// Instantaneous integrands plus cumulative trapezoid accumulators over the
// fine stepping grid. "Stress" below is always the total deviatoric stress
// (lifting plus Galerkin part) unless stated otherwise.
struct StepDiagnostics {
  double t = 0.0;
  double energy = 0.0;          // (1/2) |delta|^2
  double galerkin_power = 0.0;  // int G : T_gal (drives dE/dt)
  double dissipation = 0.0;     // int G : stress
  double source = 0.0;          // int of the truncated heating
  double theta_l1 = 0.0;        // lumped L1 norm of the Galerkin temperature
  double acc_galerkin_power = 0.0;
  double acc_m_stress = 0.0;    // int_0^t int M(x, stress)
  double acc_ms_flow = 0.0;     // int_0^t int M*(x, G)
  double acc_m_lift = 0.0;      // int_0^t int M(x, (2/d) lifting stress dev)
  double acc_product_l1 = 0.0;  // int_0^t int |G : stress|
  double acc_flow_l2 = 0.0;     // int_0^t int |G|^2
};

struct Trajectory {
  std::vector<State> states;
  std::vector<StepDiagnostics> diag;
  bool aborted = false;
  std::string abort_reason;
};

// Reconstructed fields of one state.
struct Fields {
  Eigen::VectorXd u;                            // interleaved nodal
  Eigen::VectorXd theta;                        // nodal
  std::vector<SymTensor3> epsp;                 // P0 plastic strain
  std::vector<std::vector<SymTensor3>> stress;  // Galerkin stress at (e, q)
};

// Two-level Galerkin evolution: gamma_dot_n = (1/lambda_n) int G : D eps(w_n),
// delta_dot_m = int G : D zeta_m, beta_dot_m = source_m - mu_m beta_m, with
// G = G(theta_shift + theta, dev lifting stress + dev Galerkin stress) and the
// heat source truncated at level K. Stepping couples an exact exponential on
// the linear decay with a Heun pass on the G-driven terms.
class Evolution {
 public:
  Evolution(const Mesh& mesh, const MaterialField& mat, const TriangleRule& rule,
            const TempBasis& temp, const DispBasis& disp, const ComplementBasis& comp,
            const ElasticLifting& elastic, const LiftingHeat& heat, const GModel& model,
            const NFunction& m, const ComplementaryNFunction& ms, double trunc_level,
            kernels::Exec exec = kernels::Exec::parallel);

  // beta projects the nodally truncated initial temperature; (gamma, delta)
  // project the initial plastic strain, which must be traceless pointwise.
  State initial_state(const Eigen::VectorXd& theta0, const QpTensorFn& epsp0) const;

  Fields reconstruct(const State& s) const;

  Derivative rhs(const State& s) const;

  State step(const State& s, double dt) const;

  // Fixed-dt drive over [start, start + t_final]; states and diagnostics are
  // stored every output_stride steps plus the initial and final points. A
  // non-finite stage aborts and returns the trajectory so far.
  Trajectory integrate(const State& s0, double t_final, double dt, int output_stride) const;

  double truncation_level() const { return trunc_; }
  int n_gamma() const { return disp_.count(); }
  int n_delta() const { return comp_.count(); }

 private:
  struct Stage {
    Eigen::VectorXd gamma_dot;
    Eigen::VectorXd delta_dot;
    Eigen::VectorXd beta_src;  // source integrals, no decay term
    double galerkin_power = 0.0;
    double dissipation = 0.0;
    double m_stress = 0.0;
    double ms_flow = 0.0;
    double m_lift = 0.0;
    double product_l1 = 0.0;
    double source = 0.0;
    double g_l2 = 0.0;  // L2 norm of the flow field
  };

  struct Accum {
    double galerkin_power = 0.0;
    double m_stress = 0.0;
    double ms_flow = 0.0;
    double m_lift = 0.0;
    double product_l1 = 0.0;
    double flow_l2 = 0.0;
  };

  Stage stage_eval(const State& s) const;
  State advance(const State& s, double h, const Stage& s0, const Stage* s1) const;
  State step_impl(const State& s, double h, int depth, const Stage* pre) const;
  StepDiagnostics make_diag(const State& s, const Stage& st, const Accum& acc) const;

  const Mesh& mesh_;
  const MaterialField& mat_;
  TriangleRule rule_;
  const TempBasis& temp_;
  const DispBasis& disp_;
  const ComplementBasis& comp_;
  const ElasticLifting& elastic_;
  const LiftingHeat& heat_;
  const GModel& model_;
  const NFunction& m_;
  const ComplementaryNFunction& ms_;
  double trunc_;
  kernels::Exec exec_;
  double lift_factor_;  // 2 / min(1, declared coercivity constant)
  Eigen::VectorXd lumped_;
};

}  // namespace tvesim
