#include "tvesim/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace tvesim {

namespace {

void append_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_row(std::string& out, const std::vector<double>& vals) {
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i > 0) out += ',';
    append_num(out, vals[i]);
  }
  out += '\n';
}

}  // namespace

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void ensure_dir(const std::string& path) { std::filesystem::create_directories(path); }

std::string energy_csv(const Trajectory& traj) {
  std::string out =
      "t,energy,galerkin_power,dissipation,source,theta_l1,acc_galerkin_power,"
      "acc_m_stress,acc_ms_flow,acc_m_lift,acc_product_l1,acc_flow_l2\n";
  for (const auto& d : traj.diag)
    append_row(out, {d.t, d.energy, d.galerkin_power, d.dissipation, d.source, d.theta_l1,
                     d.acc_galerkin_power, d.acc_m_stress, d.acc_ms_flow, d.acc_m_lift,
                     d.acc_product_l1, d.acc_flow_l2});
  return out;
}

std::string snapshot_name(double t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "state_%.6f.vtk", t);
  return buf;
}

std::string vtk_snapshot(const Mesh& mesh, const Fields& fields, double t) {
  const int nn = mesh.n_nodes();
  const int ne = mesh.n_elems();
  std::string out = "# vtk DataFile Version 2.0\n";
  out += "fields at t=";
  append_num(out, t);
  out += "\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS " + std::to_string(nn) + " double\n";
  for (int i = 0; i < nn; ++i) {
    append_num(out, mesh.nodes[static_cast<std::size_t>(i)][0]);
    out += ' ';
    append_num(out, mesh.nodes[static_cast<std::size_t>(i)][1]);
    out += " 0\n";
  }
  out += "CELLS " + std::to_string(ne) + ' ' + std::to_string(4 * ne) + '\n';
  for (int e = 0; e < ne; ++e) {
    const auto& tri = mesh.tris[static_cast<std::size_t>(e)];
    out += "3 " + std::to_string(tri[0]) + ' ' + std::to_string(tri[1]) + ' ' +
           std::to_string(tri[2]) + '\n';
  }
  out += "CELL_TYPES " + std::to_string(ne) + '\n';
  for (int e = 0; e < ne; ++e) out += "5\n";

  out += "POINT_DATA " + std::to_string(nn) + '\n';
  out += "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < nn; ++i) {
    append_num(out, fields.theta[i]);
    out += '\n';
  }
  out += "VECTORS displacement double\n";
  for (int i = 0; i < nn; ++i) {
    append_num(out, fields.u[2 * i]);
    out += ' ';
    append_num(out, fields.u[2 * i + 1]);
    out += " 0\n";
  }

  out += "CELL_DATA " + std::to_string(ne) + '\n';
  out += "SCALARS plastic_strain_norm double 1\nLOOKUP_TABLE default\n";
  for (int e = 0; e < ne; ++e) {
    append_num(out, tnorm(fields.epsp[static_cast<std::size_t>(e)]));
    out += '\n';
  }
  out += "SCALARS stress_dev_norm double 1\nLOOKUP_TABLE default\n";
  for (int e = 0; e < ne; ++e) {
    const auto& qs = fields.stress[static_cast<std::size_t>(e)];
    double acc = 0.0;
    for (const auto& s : qs) acc += tnorm(s.dev());
    append_num(out, qs.empty() ? 0.0 : acc / static_cast<double>(qs.size()));
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "label,k,l,dt,trunc,final_energy,energy_indicator,min_margin,pass\n";
  for (const auto& r : rows) {
    out += r.label + ',' + std::to_string(r.k) + ',' + std::to_string(r.l) + ',';
    append_num(out, r.dt);
    out += ',';
    append_num(out, r.trunc);
    out += ',';
    append_num(out, r.final_energy);
    out += ',';
    append_num(out, r.indicator);
    out += ',';
    append_num(out, r.min_margin);
    out += ',';
    out += r.pass ? "1" : "0";
    out += '\n';
  }
  return out;
}

std::string tail_csv(const std::vector<TailRow>& rows) {
  std::string out = "level,tail\n";
  for (const auto& r : rows) append_row(out, {r.level, r.tail});
  return out;
}

std::string residual_csv(const std::vector<ResidualRow>& rows) {
  std::string out = "eps,support,residual\n";
  for (const auto& r : rows) append_row(out, {r.eps, r.support, r.residual});
  return out;
}

std::string cauchy_csv(const std::vector<CauchyRow>& rows) {
  std::string out = "eps_a,eps_b,lhs,rhs,margin\n";
  for (const auto& r : rows) append_row(out, {r.eps_a, r.eps_b, r.lhs, r.rhs, r.margin});
  return out;
}

}  // namespace tvesim
