#pragma once

#include <string>
#include <vector>

#include "tvesim/diagnostics.hpp"
#include "tvesim/io.hpp"
#include "tvesim/scenario.hpp"

namespace tvesim {

// Which diagnostic families a run asserts; "all" is the union.
enum class CheckSet { all, energy, orlicz, renorm };
CheckSet parse_check_set(const std::string& word);

enum class SweepAxis { kl, dt, trunc };
SweepAxis parse_sweep_axis(const std::string& word);  // "kl" | "dt" | "K"

struct RunResult {
  Trajectory traj;
  std::vector<CheckRecord> checks;
  bool pass = true;
};

// Integrates the scenario and evaluates the enabled checks; the seed feeds
// the sampled constitutive validators only.
RunResult run_scenario(const Assembled& a, CheckSet set, unsigned long long seed);

// energy.csv, state_<t>.vtk snapshots, report.json, plots.gp.
void write_run_outputs(const std::string& outdir, const Assembled& a, const RunResult& r);

struct StudyResult {
  std::vector<CheckRecord> checks;
  std::vector<TailRow> tails;
  std::vector<ResidualRow> residuals;
  std::vector<CauchyRow> cauchy;
  bool pass = true;
};

StudyResult run_renorm_study(const RenormAssembled& a);

// tail.csv, residual.csv, cauchy.csv, report.json, plots.gp.
void write_study_outputs(const std::string& outdir, const StudyResult& r);

struct SweepResult {
  std::vector<SweepRow> rows;
  bool pass = true;
};

// Runs `points` doublings along the axis in a bounded worker pool; one
// subdirectory per point plus summary.csv at the root.
SweepResult run_sweep(const Scenario& base, SweepAxis axis, int points, const std::string& outdir,
                      CheckSet set, unsigned long long seed, int workers);

}  // namespace tvesim
