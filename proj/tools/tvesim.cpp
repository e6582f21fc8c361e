#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "tvesim/runner.hpp"

namespace {

using namespace tvesim;

void print_checks(const std::vector<CheckRecord>& checks) {
  for (const auto& c : checks)
    std::printf("%s  %-28s margin=%.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.margin);
}

int fail_mode(const std::string& have, const std::string& need) {
  std::fprintf(stderr, "error: scenario mode is '%s'; this subcommand needs a '%s' scenario\n",
               have.c_str(), need.c_str());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level Galerkin simulator for quasi-static thermo-visco-elasticity"};
  app.require_subcommand(1);

  std::string config;
  std::string outdir = "out";
  std::string checks = "all";
  std::string axis_word;
  unsigned long long seed = 0;
  int points = 3;
  int workers = 2;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "scenario file")->required();
    sub->add_option("--out", outdir, "output directory (default: out)");
    sub->add_option("--checks", checks, "check families: all, energy, orlicz, renorm");
    sub->add_option("--seed", seed, "seed for the sampled constitutive validators");
  };

  CLI::App* run = app.add_subcommand("run", "integrate one scenario and write its diagnostics");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "rerun a scenario along a refinement axis");
  add_common(sweep);
  sweep->add_option("--sweep-axis,--axis", axis_word, "refinement axis: kl, dt, or K")->required();
  sweep->add_option("--points", points, "number of doublings (default: 3)")
      ->check(CLI::Range(1, 12));
  sweep->add_option("--workers", workers, "concurrent points (default: 2)")
      ->check(CLI::Range(1, 64));
  CLI::App* renorm = app.add_subcommand("renormheat", "renormalized singular-source heat study");
  add_common(renorm);

  CLI11_PARSE(app, argc, argv);

  try {
    const CheckSet set = parse_check_set(checks);
    const Scenario scn = load_scenario(config);

    if (renorm->parsed()) {
      if (!scn.renorm) {
        std::fprintf(stderr, "error: scenario '%s' has no [renormheat] section\n",
                     scn.name.c_str());
        return 2;
      }
      const auto a = assemble_renorm(scn);
      StudyResult r;
      if (set == CheckSet::all || set == CheckSet::renorm) r = run_renorm_study(*a);
      write_study_outputs(outdir, r);
      print_checks(r.checks);
      std::printf("%s  study '%s' -> %s\n", r.pass ? "PASS" : "FAIL", scn.name.c_str(),
                  outdir.c_str());
      return r.pass ? 0 : 1;
    }

    if (scn.mode != "run") return fail_mode(scn.mode, "run");

    if (run->parsed()) {
      const auto a = assemble(scn);
      const RunResult r = run_scenario(*a, set, seed);
      write_run_outputs(outdir, *a, r);
      print_checks(r.checks);
      std::printf("%s  run '%s' -> %s\n", r.pass ? "PASS" : "FAIL", scn.name.c_str(),
                  outdir.c_str());
      return r.pass ? 0 : 1;
    }

    const SweepAxis axis = parse_sweep_axis(axis_word);
    const SweepResult r = run_sweep(scn, axis, points, outdir, set, seed, workers);
    for (const auto& row : r.rows)
      std::printf("%s  %-16s energy=%.9g indicator=%.3g\n", row.pass ? "PASS" : "FAIL",
                  row.label.c_str(), row.final_energy, row.indicator);
    std::printf("%s  sweep '%s' -> %s\n", r.pass ? "PASS" : "FAIL", scn.name.c_str(),
                outdir.c_str());
    return r.pass ? 0 : 1;
  } catch (const ConfigParseError& e) {
    std::fprintf(stderr, "config error at line %d, column %d: %s\n", e.line, e.column, e.what());
    return 2;
  } catch (const ScenarioError& e) {
    for (const auto& v : e.violations)
      std::fprintf(stderr, "invalid scenario: %s: %s\n", v.field.c_str(), v.message.c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
