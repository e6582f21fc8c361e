#pragma once

#include <string>
#include <vector>

#include "tvesim/evolution.hpp"

namespace tvesim {

// Temp file + rename, so readers never observe a partial file.
void write_atomic(const std::string& path, const std::string& content);
void ensure_dir(const std::string& path);

// CSV of the per-step trajectory records; columns documented in docs/outputs.md.
std::string energy_csv(const Trajectory& traj);

// Legacy ASCII VTK v2 snapshot of the reconstructed fields.
std::string vtk_snapshot(const Mesh& mesh, const Fields& fields, double t);
std::string snapshot_name(double t);  // state_<t>.vtk

struct SweepRow {
  std::string label;
  int k = 0;
  int l = 0;
  double dt = 0.0;
  double trunc = 0.0;
  double final_energy = 0.0;
  double indicator = 0.0;  // |final energy - previous row's final energy|
  double min_margin = 0.0;
  bool pass = false;
};
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct TailRow {
  double level = 0.0;
  double tail = 0.0;
};
std::string tail_csv(const std::vector<TailRow>& rows);

struct ResidualRow {
  double eps = 0.0;
  double support = 0.0;
  double residual = 0.0;
};
std::string residual_csv(const std::vector<ResidualRow>& rows);

struct CauchyRow {
  double eps_a = 0.0;
  double eps_b = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};
std::string cauchy_csv(const std::vector<CauchyRow>& rows);

}  // namespace tvesim
