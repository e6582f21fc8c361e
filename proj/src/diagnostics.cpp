#include "tvesim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tvesim {

namespace {

std::vector<SymTensor3> combined_strain(const Mesh& mesh, const ComplementBasis& comp,
                                        const Eigen::VectorXd& delta) {
  if (delta.size() != comp.count())
    throw std::invalid_argument("diagnostics: delta size does not match the complement basis");
  std::vector<SymTensor3> comb(static_cast<std::size_t>(mesh.n_elems()));
  for (int m = 0; m < comp.count(); ++m) {
    const auto& z = comp.zeta[static_cast<std::size_t>(m)];
    for (std::size_t e = 0; e < comb.size(); ++e) comb[e] += z[e] * delta[m];
  }
  return comb;
}

void require_diag(const Trajectory& traj) {
  if (traj.diag.empty()) throw std::invalid_argument("diagnostics: trajectory carries no records");
}

double psi_weight(double t, double mu, double tau) {
  if (t <= tau) return 1.0;
  if (t >= tau + mu) return 0.0;
  return 1.0 - (t - tau) / mu;
}

void append_json_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

double potential_energy(const Eigen::VectorXd& delta) { return 0.5 * delta.squaredNorm(); }

double potential_energy_quadrature(const Mesh& mesh, const MaterialField& mat,
                                   const TriangleRule& rule, const ComplementBasis& comp,
                                   const Eigen::VectorXd& delta) {
  const auto comb = combined_strain(mesh, comp, delta);
  const auto dint = integrated_moduli(mesh, mat, rule);
  return 0.5 * d_inner(dint, comb, comb);
}

EquilibriumReport equilibrium_residual(const Mesh& mesh, const MaterialField& mat,
                                       const TriangleRule& rule, const DispBasis& disp,
                                       const ComplementBasis& comp,
                                       const Eigen::VectorXd& delta) {
  const auto comb = combined_strain(mesh, comp, delta);
  const auto dint = integrated_moduli(mesh, mat, rule);

  EquilibriumReport rep;
  for (int n = 0; n < disp.count(); ++n)
    rep.residual =
        std::max(rep.residual, std::abs(d_inner(dint, comb, disp.strain[static_cast<std::size_t>(n)])));

  double sq = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double jac = 2.0 * mesh.area[static_cast<std::size_t>(e)];
    for (std::size_t q = 0; q < rule.n; ++q) {
      const SymTensor3 t =
          mat.at(mesh, e, rule.pts[q].l1, rule.pts[q].l2).apply(comb[static_cast<std::size_t>(e)]);
      sq += rule.pts[q].w * jac * ddot(t, t);
    }
  }
  rep.stress_l2 = std::sqrt(sq);
  rep.pass = rep.residual <= 1e-10 * (1.0 + rep.stress_l2);
  return rep;
}

IdentityReport energy_identity(const Trajectory& traj) {
  require_diag(traj);
  IdentityReport rep;
  const double e0 = traj.diag.front().energy;
  for (const auto& d : traj.diag) {
    rep.residual = std::max(rep.residual, std::abs(d.energy - e0 + d.acc_galerkin_power));
    rep.scale = std::max(rep.scale, d.energy);
  }
  return rep;
}

EnergyReport energy_budget(const Trajectory& traj, double c) {
  require_diag(traj);
  if (!(c > 0.0)) throw std::invalid_argument("energy budget: coercivity constant must be positive");

  const double d = std::min(1.0, c);
  const double flow_coef = c - 0.5 * d;
  const double e0 = traj.diag.front().energy;

  EnergyReport rep;
  rep.budget = e0 + traj.diag.back().acc_m_lift;
  double prev_t = 0.0;
  double prev_diss = 0.0;
  double cum = 0.0;
  bool first = true;
  for (const auto& dg : traj.diag) {
    if (!first) cum += 0.5 * (dg.t - prev_t) * (prev_diss + dg.dissipation);
    prev_t = dg.t;
    prev_diss = dg.dissipation;
    first = false;

    rep.times.push_back(dg.t);
    rep.energy.push_back(dg.energy);
    rep.cumulative_dissipation.push_back(cum);
    rep.modular_stress.push_back(dg.acc_m_stress);
    rep.modular_flow.push_back(dg.acc_ms_flow);
    rep.margins.push_back(rep.budget -
                          (dg.energy + c * dg.acc_m_stress + flow_coef * dg.acc_ms_flow));
  }
  rep.min_margin = *std::min_element(rep.margins.begin(), rep.margins.end());
  rep.pass = rep.min_margin >= -1e-12 * (1.0 + std::abs(rep.budget));
  return rep;
}

PsiProbe psi_probe(const Trajectory& traj, double mu, double tau) {
  require_diag(traj);
  if (!(mu > 0.0) || tau < 0.0) throw std::invalid_argument("psi probe: need mu > 0 and tau >= 0");
  const double t_end = traj.diag.back().t;
  if (tau + mu > t_end * (1.0 + 1e-12) + 1e-15)
    throw std::invalid_argument("psi probe: window extends beyond the trajectory");

  PsiProbe rep;
  const auto& dg = traj.diag;
  for (std::size_t i = 0; i + 1 < dg.size(); ++i) {
    const double h = dg[i + 1].t - dg[i].t;
    rep.lhs += 0.5 * h *
               (psi_weight(dg[i].t, mu, tau) * dg[i].galerkin_power +
                psi_weight(dg[i + 1].t, mu, tau) * dg[i + 1].galerkin_power);
  }

  // exact integral of the piecewise-linear energy over [tau, tau + mu]
  double acc = 0.0;
  const double b_lo = tau;
  const double b_hi = std::min(tau + mu, t_end);
  for (std::size_t i = 0; i + 1 < dg.size(); ++i) {
    const double t0 = dg[i].t;
    const double t1 = dg[i + 1].t;
    const double lo = std::max(t0, b_lo);
    const double hi = std::min(t1, b_hi);
    if (hi <= lo || t1 <= t0) continue;
    const double slope = (dg[i + 1].energy - dg[i].energy) / (t1 - t0);
    const double e_lo = dg[i].energy + slope * (lo - t0);
    const double e_hi = dg[i].energy + slope * (hi - t0);
    acc += 0.5 * (hi - lo) * (e_lo + e_hi);
  }
  rep.average_energy = acc / mu;
  rep.defect = std::abs(rep.lhs - (dg.front().energy - rep.average_energy));
  return rep;
}

OrliczAudit audit_orlicz(const Trajectory& traj) {
  require_diag(traj);
  OrliczAudit rep;
  const auto& last = traj.diag.back();
  rep.product_l1 = last.acc_product_l1;
  rep.modular_stress = last.acc_m_stress;
  rep.modular_flow = last.acc_ms_flow;
  rep.flow_l2 = last.acc_flow_l2;

  bool first = true;
  for (const auto& d : traj.diag) {
    const double fy = d.acc_m_stress + d.acc_ms_flow - d.acc_product_l1;
    const double conj = d.acc_flow_l2 - d.acc_ms_flow;
    if (first) {
      rep.fy_margin = fy;
      rep.conjugate_margin = conj;
      first = false;
    } else {
      rep.fy_margin = std::min(rep.fy_margin, fy);
      rep.conjugate_margin = std::min(rep.conjugate_margin, conj);
    }
  }
  rep.fy_pass = rep.fy_margin >= -1e-12 * (1.0 + rep.modular_stress + rep.modular_flow);
  return rep;
}

double max_theta_l1(const Trajectory& traj) {
  require_diag(traj);
  double v = 0.0;
  for (const auto& d : traj.diag) v = std::max(v, d.theta_l1);
  return v;
}

std::string format_report(const std::vector<CheckRecord>& checks) {
  std::string out = "{\n  \"checks\": [";
  bool first = true;
  for (const auto& c : checks) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "    {\"name\": \"" + c.name + "\", \"pass\": ";
    out += c.pass ? "true" : "false";
    out += ", \"margin\": ";
    append_json_number(out, c.margin);
    out += ", \"values\": [";
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      if (i > 0) out += ", ";
      append_json_number(out, c.values[i]);
    }
    out += "]}";
  }
  out += "\n  ]\n}\n";
  return out;
}

}  // namespace tvesim
