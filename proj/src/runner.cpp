#include "tvesim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "tvesim/constitutive.hpp"

namespace tvesim {

namespace {

std::string num_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

CheckRecord record(std::string name, std::vector<double> values, double margin, bool pass) {
  CheckRecord r;
  r.name = std::move(name);
  r.values = std::move(values);
  r.margin = margin;
  r.pass = pass;
  return r;
}

bool enabled(CheckSet set, CheckSet family) { return set == CheckSet::all || set == family; }

const char* kPlotsPreamble =
    "# gnuplot commands for the CSV outputs in this directory.\n"
    "# Generated alongside the data; nothing in the pipeline executes it.\n"
    "set datafile separator \",\"\n"
    "set terminal pngcairo size 1000,700\n"
    "set grid\n";

}  // namespace

CheckSet parse_check_set(const std::string& word) {
  if (word == "all") return CheckSet::all;
  if (word == "energy") return CheckSet::energy;
  if (word == "orlicz") return CheckSet::orlicz;
  if (word == "renorm") return CheckSet::renorm;
  throw std::invalid_argument("unknown check set '" + word +
                              "' (expected all, energy, orlicz, or renorm)");
}

SweepAxis parse_sweep_axis(const std::string& word) {
  if (word == "kl") return SweepAxis::kl;
  if (word == "dt") return SweepAxis::dt;
  if (word == "K") return SweepAxis::trunc;
  throw std::invalid_argument("unknown sweep axis '" + word + "' (expected kl, dt, or K)");
}

RunResult run_scenario(const Assembled& a, CheckSet set, unsigned long long seed) {
  RunResult out;
  const DiscretizationSpec& d = a.scn.disc;
  out.traj = a.evolution().integrate(a.initial_state(), d.t_final, d.dt, d.output_stride);
  if (out.traj.aborted) {
    out.checks.push_back(record("integration completed", {}, -1.0, false));
    out.pass = false;
    return out;
  }

  if (enabled(set, CheckSet::energy)) {
    const auto ident = energy_identity(out.traj);
    const double itol = std::max(1e-10, 2.0 * d.dt * d.dt * (1.0 + d.t_final)) * ident.scale;
    out.checks.push_back(record("energy identity", {ident.residual, ident.scale},
                                itol - ident.residual, ident.residual <= itol));

    const double c = a.model.declared_c();
    const auto bud = energy_budget(out.traj, c);
    out.checks.push_back(
        record("dissipation budget", {bud.budget, c, bud.min_margin}, bud.min_margin, bud.pass));

    const double e0 = out.traj.diag.front().energy;
    const auto probe = psi_probe(out.traj, 0.5 * d.t_final, 0.25 * d.t_final);
    const double ptol = std::max(1e-10, 10.0 * d.dt * d.dt * (1.0 + e0));
    out.checks.push_back(record("power window identity", {probe.lhs, probe.average_energy},
                                ptol - probe.defect, probe.defect <= ptol));

    const auto eq = equilibrium_residual(a.mesh, a.mat, a.rule, a.disp, a.comp,
                                         out.traj.states.back().delta);
    out.checks.push_back(record("equilibrium orthogonality", {eq.residual, eq.stress_l2},
                                1e-10 * (1.0 + eq.stress_l2) - eq.residual, eq.pass));

    const double tl1 = max_theta_l1(out.traj);
    out.checks.push_back(record("temperature mass bounded", {tl1}, 0.0, std::isfinite(tl1)));
  }

  if (enabled(set, CheckSet::orlicz)) {
    const auto aud = audit_orlicz(out.traj);
    // The conjugate-versus-quadratic comparison needs M*(x, .) <= |.|^2 for
    // every argument, which the power family satisfies only at exponent 2.
    const bool quad_gate = a.m.is_power() && a.m.p_min() == 2.0 && a.m.p_max() == 2.0;
    const double ctol = 1e-9 * (1.0 + aud.flow_l2);
    const bool conj_ok = !quad_gate || aud.conjugate_margin >= -ctol;
    out.checks.push_back(record(
        "stress-flow duality",
        {aud.product_l1, aud.modular_stress, aud.modular_flow, aud.fy_margin,
         aud.conjugate_margin},
        quad_gate ? std::min(aud.fy_margin, aud.conjugate_margin + ctol) : aud.fy_margin,
        aud.fy_pass && conj_ok));

    const std::vector<std::array<double, 2>> xs = {{0.1 * a.scn.mesh.lx, 0.2 * a.scn.mesh.ly},
                                                   {0.5 * a.scn.mesh.lx, 0.5 * a.scn.mesh.ly},
                                                   {0.9 * a.scn.mesh.lx, 0.7 * a.scn.mesh.ly}};
    const auto mono = check_monotonicity(a.model, xs, 2000, seed);
    out.checks.push_back(record("flow monotonicity", {mono.min_gap},
                                mono.min_gap + 1e-12 * a.model.scale(),
                                mono.min_gap >= -1e-12 * a.model.scale()));

    const auto coer = check_coercivity(a.model, a.m, a.ms, xs, 2000, seed + 1);
    out.checks.push_back(record("flow coercivity", {coer.declared, coer.sampled_inf},
                                coer.sampled_inf - coer.declared,
                                coer.ok() && coer.sampled_inf + 1e-12 >= coer.declared));
  }

  for (const auto& c : out.checks) out.pass = out.pass && c.pass;
  return out;
}

void write_run_outputs(const std::string& outdir, const Assembled& a, const RunResult& r) {
  ensure_dir(outdir);
  write_atomic(outdir + "/energy.csv", energy_csv(r.traj));
  write_atomic(outdir + "/report.json", format_report(r.checks));

  const std::size_t n = r.traj.states.size();
  if (n > 0) {
    const std::size_t stride = a.scn.disc.vtk_stride > 0
                                   ? static_cast<std::size_t>(a.scn.disc.vtk_stride)
                                   : std::max<std::size_t>(1, (n - 1) / 4);
    for (std::size_t i = 0; i < n; i += stride) {
      const State& st = r.traj.states[i];
      write_atomic(outdir + "/" + snapshot_name(st.t),
                   vtk_snapshot(a.mesh, a.evolution().reconstruct(st), st.t));
    }
    const State& last = r.traj.states.back();
    if ((n - 1) % stride != 0)
      write_atomic(outdir + "/" + snapshot_name(last.t),
                   vtk_snapshot(a.mesh, a.evolution().reconstruct(last), last.t));
  }

  std::string gp = kPlotsPreamble;
  gp +=
      "set output \"energy.png\"\n"
      "set xlabel \"t\"\n"
      "plot \"energy.csv\" using 1:2 with lines title \"energy\", \\\n"
      "     \"energy.csv\" using 1:4 with lines title \"dissipation rate\"\n"
      "set output \"accumulators.png\"\n"
      "plot \"energy.csv\" using 1:8 with lines title \"modular stress\", \\\n"
      "     \"energy.csv\" using 1:9 with lines title \"modular flow\", \\\n"
      "     \"energy.csv\" using 1:10 with lines title \"lift modular\"\n"
      "set output \"temperature.png\"\n"
      "plot \"energy.csv\" using 1:6 with lines title \"temperature L1\"\n";
  write_atomic(outdir + "/plots.gp", gp);
}

StudyResult run_renorm_study(const RenormAssembled& a) {
  StudyResult out;
  const RenormSpec& spec = a.spec;

  const auto fam = check_family(a.problem, a.rule, spec.eps);
  out.checks.push_back(record("truncated data family",
                              {fam.target_l1, fam.source_l1.empty() ? 0.0 : fam.source_l1.back()},
                              fam.target_l1, fam.source_bounded && fam.initial_converging));

  std::vector<HeatSolution> sols;
  sols.reserve(spec.eps.size());
  double worst_mass = 0.0;
  for (const double e : spec.eps) {
    sols.push_back(solve_truncated(a.problem, a.rule, e));
    worst_mass = std::max(worst_mass, sols.back().mass_residual);
  }
  out.checks.push_back(
      record("mass balance", {worst_mass}, 1e-8 - worst_mass, worst_mass <= 1e-8));

  const HeatSolution& finest = sols.back();
  bool tails_ok = true;
  for (const double level : spec.tail_levels) {
    const double tail = truncation_tail(a.mesh, a.rule, finest, level, spec.tail_band);
    if (!out.tails.empty() && tail > out.tails.back().tail * (1.0 + 1e-9) + 1e-12)
      tails_ok = false;
    out.tails.push_back({level, tail});
  }
  const double t0 = out.tails.front().tail;
  const double tlast = out.tails.back().tail;
  if (t0 > 0.0 && tlast > 0.1 * t0) tails_ok = false;
  out.checks.push_back(record("truncation tail decay", {t0, tlast}, 0.1 * t0 - tlast, tails_ok));

  const SpaceTimeTest test = polynomial_bump_test(spec.test_ix, spec.test_iy, spec.t_final);
  bool res_ok = true;
  double res_margin = 0.0;
  bool first_pair = true;
  for (const double support : spec.clamp_supports) {
    const SmoothClamp clamp(support);
    double prev = 0.0;
    for (std::size_t i = 0; i < spec.eps.size(); ++i) {
      const double res =
          std::abs(renorm_residual(a.mesh, a.rule, sols[i], a.target, clamp, test));
      out.residuals.push_back({spec.eps[i], support, res});
      if (i > 0) {
        if (res > prev * (1.0 + 1e-9) + 1e-15) res_ok = false;
        const double gap = prev - res;
        res_margin = first_pair ? gap : std::min(res_margin, gap);
        first_pair = false;
      }
      prev = res;
    }
  }
  out.checks.push_back(record("renormalized residual decay", {res_margin}, res_margin, res_ok));

  bool cauchy_ok = true;
  double cauchy_margin = 0.0;
  for (std::size_t i = 0; i + 1 < spec.eps.size(); ++i) {
    const auto rep = cauchy_bound(a.problem, a.rule, spec.eps[i], spec.eps[i + 1]);
    out.cauchy.push_back({spec.eps[i], spec.eps[i + 1], rep.lhs, rep.rhs, rep.margin});
    if (rep.margin < -1e-10 * (1.0 + rep.rhs)) cauchy_ok = false;
    cauchy_margin = i == 0 ? rep.margin : std::min(cauchy_margin, rep.margin);
  }
  out.checks.push_back(
      record("contraction in the data", {cauchy_margin}, cauchy_margin, cauchy_ok));

  const double shift = 0.25 * spec.amp;
  const SourceFn base = a.problem.source(spec.eps.front());
  const SourceFn larger = [base, shift](double x, double y, double t) {
    return base(x, y, t) + shift;
  };
  const int nn = a.mesh.n_nodes();
  const double gap =
      comparison_gap(a.mesh, a.rule, base, Eigen::VectorXd::Zero(nn), larger,
                     Eigen::VectorXd::Constant(nn, shift), spec.t_final, spec.steps);
  out.checks.push_back(record("comparison principle", {gap}, gap + 1e-8, gap >= -1e-8));

  bool energy_ok = true;
  double energy_margin = 0.0;
  bool first_level = true;
  for (const double level : {spec.tail_levels.front(), spec.tail_levels.back()}) {
    const auto rep = truncation_energy(a.problem, a.rule, spec.eps.back(), finest, level);
    if (rep.margin < -1e-8 * (1.0 + rep.rhs)) energy_ok = false;
    if (rep.l2_margin < -1e-12 * (1.0 + rep.lhs_max)) energy_ok = false;
    energy_margin = first_level ? rep.margin : std::min(energy_margin, rep.margin);
    first_level = false;
  }
  out.checks.push_back(
      record("truncation energy bound", {energy_margin}, energy_margin, energy_ok));

  for (const auto& c : out.checks) out.pass = out.pass && c.pass;
  return out;
}

void write_study_outputs(const std::string& outdir, const StudyResult& r) {
  ensure_dir(outdir);
  write_atomic(outdir + "/tail.csv", tail_csv(r.tails));
  write_atomic(outdir + "/residual.csv", residual_csv(r.residuals));
  write_atomic(outdir + "/cauchy.csv", cauchy_csv(r.cauchy));
  write_atomic(outdir + "/report.json", format_report(r.checks));

  std::string gp = kPlotsPreamble;
  gp +=
      "set output \"tail.png\"\n"
      "set logscale y\n"
      "set xlabel \"truncation level\"\n"
      "plot \"tail.csv\" using 1:($2 > 0 ? $2 : 1/0) with linespoints title \"tail norm\"\n"
      "set output \"residual.png\"\n"
      "set logscale xy\n"
      "set xlabel \"eps\"\n"
      "plot \"residual.csv\" using 1:3 with points title \"renormalized residual\"\n"
      "set output \"cauchy.png\"\n"
      "unset logscale\n"
      "set xlabel \"pair\"\n"
      "plot \"cauchy.csv\" using 0:3 with linespoints title \"distance\", \\\n"
      "     \"cauchy.csv\" using 0:4 with linespoints title \"data bound\"\n";
  write_atomic(outdir + "/plots.gp", gp);
}

SweepResult run_sweep(const Scenario& base, SweepAxis axis, int points, const std::string& outdir,
                      CheckSet set, unsigned long long seed, int workers) {
  if (points < 1) throw std::invalid_argument("sweep needs at least one point");
  std::vector<Scenario> pts;
  std::vector<std::string> labels;
  for (int i = 0; i < points; ++i) {
    Scenario s = base;
    const int factor = 1 << i;
    switch (axis) {
      case SweepAxis::kl:
        s.disc.k = base.disc.k * factor;
        s.disc.l = base.disc.l * factor;
        labels.push_back("kl_" + std::to_string(s.disc.k) + "x" + std::to_string(s.disc.l));
        break;
      case SweepAxis::dt:
        s.disc.dt = base.disc.dt / factor;
        labels.push_back("dt_" + num_label(s.disc.dt));
        break;
      case SweepAxis::trunc:
        s.disc.trunc = base.truncation() * factor;
        labels.push_back("K_" + num_label(s.disc.trunc));
        break;
    }
    pts.push_back(std::move(s));
  }

  SweepResult out;
  out.rows.resize(pts.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pts.size()) return;
      SweepRow& row = out.rows[i];
      row.label = labels[i];
      row.k = pts[i].disc.k;
      row.l = pts[i].disc.l;
      row.dt = pts[i].disc.dt;
      row.trunc = pts[i].truncation();
      try {
        const auto a = assemble(pts[i], kernels::Exec::serial);
        const RunResult r = run_scenario(*a, set, seed);
        write_run_outputs(outdir + "/" + labels[i], *a, r);
        row.final_energy = r.traj.diag.empty() ? 0.0 : r.traj.diag.back().energy;
        for (const auto& c : r.checks)
          if (c.name == "dissipation budget") row.min_margin = c.margin;
        row.pass = r.pass;
      } catch (const std::exception&) {
        row.pass = false;
      }
    }
  };

  const int pool = std::max(1, std::min<int>(workers, static_cast<int>(pts.size())));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(pool));
  for (int i = 0; i < pool; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  for (std::size_t i = 1; i < out.rows.size(); ++i)
    out.rows[i].indicator = std::abs(out.rows[i].final_energy - out.rows[i - 1].final_energy);
  for (const auto& r : out.rows) out.pass = out.pass && r.pass;

  ensure_dir(outdir);
  write_atomic(outdir + "/summary.csv", sweep_csv(out.rows));
  std::string gp = kPlotsPreamble;
  gp +=
      "set output \"sweep.png\"\n"
      "set xlabel \"refinement step\"\n"
      "set logscale y\n"
      "plot \"summary.csv\" using 0:($7 > 0 ? $7 : 1/0) with linespoints "
      "title \"energy indicator\"\n";
  write_atomic(outdir + "/plots.gp", gp);
  return out;
}

}  // namespace tvesim
