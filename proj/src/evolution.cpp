#include "tvesim/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tvesim/fem.hpp"

namespace tvesim {

namespace {

// phi1(z) = (e^z - 1) / z, phi2(z) = (e^z - 1 - z) / z^2, both continuous at 0.
double phi1(double z) {
  if (z == 0.0) return 1.0;
  return std::expm1(z) / z;
}

double phi2(double z) {
  if (std::abs(z) < 1e-2)
    return 0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z * (1.0 / 120.0 + z / 720.0)));
  return (std::expm1(z) - z) / (z * z);
}

}  // namespace

// Relative distance between the driving projections of two stages; sign
// sensitive, so an oscillatory instability registers even when the flow
// magnitude is preserved.
static double stage_change(const Eigen::VectorXd& g0, const Eigen::VectorXd& d0,
                           const Eigen::VectorXd& b0, const Eigen::VectorXd& g1,
                           const Eigen::VectorXd& d1, const Eigen::VectorXd& b1) {
  const double n0 = std::sqrt(g0.squaredNorm() + d0.squaredNorm() + b0.squaredNorm());
  const double n1 = std::sqrt(g1.squaredNorm() + d1.squaredNorm() + b1.squaredNorm());
  const double ref = std::max(n0, n1);
  if (!(ref > 0.0)) return 0.0;
  const double d = std::sqrt((g1 - g0).squaredNorm() + (d1 - d0).squaredNorm() +
                             (b1 - b0).squaredNorm());
  return d / ref;
}

Evolution::Evolution(const Mesh& mesh, const MaterialField& mat, const TriangleRule& rule,
                     const TempBasis& temp, const DispBasis& disp, const ComplementBasis& comp,
                     const ElasticLifting& elastic, const LiftingHeat& heat, const GModel& model,
                     const NFunction& m, const ComplementaryNFunction& ms, double trunc_level,
                     kernels::Exec exec)
    : mesh_(mesh),
      mat_(mat),
      rule_(rule),
      temp_(temp),
      disp_(disp),
      comp_(comp),
      elastic_(elastic),
      heat_(heat),
      model_(model),
      m_(m),
      ms_(ms),
      trunc_(trunc_level),
      exec_(exec) {
  if (!(trunc_ > 0.0)) throw std::invalid_argument("truncation level must be positive");
  if (temp_.count() < 1) throw std::invalid_argument("at least one temperature mode is required");
  if (temp_.count() != comp_.count())
    throw std::invalid_argument("temperature and complement mode counts must match");
  const double c = model_.declared_c();
  lift_factor_ = 2.0 / std::min(1.0, c > 0.0 ? c : 1.0);
  lumped_ = lumped_mass_scalar(mesh_);
}

State Evolution::initial_state(const Eigen::VectorXd& theta0, const QpTensorFn& epsp0) const {
  if (theta0.size() != mesh_.n_nodes())
    throw std::invalid_argument("initial temperature has wrong nodal size");
  Eigen::VectorXd tr(theta0.size());
  for (Eigen::Index i = 0; i < theta0.size(); ++i) tr[i] = truncate(trunc_, theta0[i]);

  State s;
  s.t = 0.0;
  s.beta = project_temperature(mesh_, temp_, tr);
  if (epsp0) {
    for (int e = 0; e < mesh_.n_elems(); ++e) {
      for (std::size_t q = 0; q < rule_.n; ++q) {
        const auto& qp = rule_.pts[q];
        const auto xy = mesh_.point(e, qp.l1, qp.l2);
        const SymTensor3 v = epsp0(e, static_cast<int>(q), xy[0], xy[1]);
        if (std::abs(v.trace()) > 1e-10 * (1.0 + tnorm(v)))
          throw std::invalid_argument("initial plastic strain is not traceless on element " +
                                      std::to_string(e));
      }
    }
    StrainProjection pr = project_strain(mesh_, mat_, rule_, disp_, comp_, epsp0);
    s.gamma = std::move(pr.gamma);
    s.delta = std::move(pr.delta);
  } else {
    s.gamma = Eigen::VectorXd::Zero(disp_.count());
    s.delta = Eigen::VectorXd::Zero(comp_.count());
  }
  return s;
}

Fields Evolution::reconstruct(const State& s) const {
  const int k = disp_.count();
  const int l = comp_.count();
  const int ne = mesh_.n_elems();

  Fields f;
  f.u = disp_.w * s.gamma;
  f.theta = temp_.v * s.beta;
  f.epsp.assign(static_cast<std::size_t>(ne), SymTensor3{});
  f.stress.assign(static_cast<std::size_t>(ne), std::vector<SymTensor3>(rule_.n));
  for (int e = 0; e < ne; ++e) {
    const std::size_t ei = static_cast<std::size_t>(e);
    SymTensor3 comb;
    for (int m = 0; m < l; ++m) comb += comp_.zeta[static_cast<std::size_t>(m)][ei] * s.delta[m];
    f.epsp[ei] = comb;
    for (int n = 0; n < k; ++n)
      f.epsp[ei] += disp_.strain[static_cast<std::size_t>(n)][ei] * s.gamma[n];
    for (std::size_t q = 0; q < rule_.n; ++q) {
      const auto& qp = rule_.pts[q];
      f.stress[ei][q] = mat_.at(mesh_, e, qp.l1, qp.l2).apply(comb) * -1.0;
    }
  }
  return f;
}

Evolution::Stage Evolution::stage_eval(const State& s) const {
  const int k = disp_.count();
  const int l = comp_.count();
  const std::size_t ne = static_cast<std::size_t>(mesh_.n_elems());
  const std::size_t nq = rule_.n;

  if (s.gamma.size() != k || s.delta.size() != l || s.beta.size() != l)
    throw std::invalid_argument("state dimensions do not match the bases");

  const LiftingElastic& le = elastic_.at(s.t);
  if (!le.stress.empty() && le.stress.front().size() != nq)
    throw std::logic_error("elastic shift uses a different quadrature rule");

  Eigen::VectorXd theta = heat_.at_time(s.t);
  theta.noalias() += temp_.v * s.beta;

  // Packed reduction layout: [gamma raw | delta_dot | beta_src | 8 aggregates].
  const std::size_t mdim = static_cast<std::size_t>(k + 2 * l) + 8;
  std::vector<double> out(mdim);

  const auto body = [&](std::size_t ei, double* acc) {
    const int e = static_cast<int>(ei);
    const double jac = 2.0 * mesh_.area[ei];
    const auto& tri = mesh_.tris[ei];
    SymTensor3 comb;
    for (int m = 0; m < l; ++m) comb += comp_.zeta[static_cast<std::size_t>(m)][ei] * s.delta[m];
    for (std::size_t q = 0; q < nq; ++q) {
      const TriQuadPoint& qp = rule_.pts[q];
      const double w = jac * qp.w;
      const double l3 = 1.0 - qp.l1 - qp.l2;
      const auto xy = mesh_.point(e, qp.l1, qp.l2);
      const ElasticModuli d = mat_.at(mesh_, e, qp.l1, qp.l2);
      const SymTensor3 t_gal = d.apply(comb) * -1.0;
      // Re-deviatorize the sum so cancellation cannot leave a relative trace.
      const SymTensor3 td = (t_gal.dev() + le.stress_dev(e, static_cast<int>(q))).dev();
      const double th = qp.l1 * theta[tri[0]] + qp.l2 * theta[tri[1]] + l3 * theta[tri[2]];
      const SymTensor3 g = model_.eval(th, td, xy[0], xy[1]);

      for (int n = 0; n < k; ++n)
        acc[n] += w * ddot(g, d.apply(disp_.strain[static_cast<std::size_t>(n)][ei]));
      for (int m = 0; m < l; ++m)
        acc[k + m] += w * ddot(g, d.apply(comp_.zeta[static_cast<std::size_t>(m)][ei]));

      const double heating = ddot(td, g);
      const double src = truncate(trunc_, heating);
      for (int m = 0; m < l; ++m) {
        const double vq =
            qp.l1 * temp_.v(tri[0], m) + qp.l2 * temp_.v(tri[1], m) + l3 * temp_.v(tri[2], m);
        acc[k + l + m] += w * src * vq;
      }

      double* agg = acc + k + 2 * l;
      agg[0] += w * ddot(g, t_gal);
      agg[1] += w * heating;
      agg[2] += w * m_.eval(xy[0], xy[1], td);
      agg[3] += w * ms_.eval(xy[0], xy[1], g);
      agg[4] += w * m_.eval(xy[0], xy[1], le.stress_dev(e, static_cast<int>(q)) * lift_factor_);
      agg[5] += w * std::abs(heating);
      agg[6] += w * src;
      agg[7] += w * ddot(g, g);
    }
  };

  // Exceptions must not escape the parallel region; they surface as a NaN
  // marker and the serial rescan below recovers the location and cause.
  const auto guarded = [&](std::size_t ei, double* acc) {
    try {
      body(ei, acc);
    } catch (...) {
      acc[mdim - 1] = std::numeric_limits<double>::quiet_NaN();
    }
  };
  kernels::reduce_vec(ne, mdim, exec_, guarded, out.data());

  bool bad = false;
  for (double v : out)
    if (!std::isfinite(v)) bad = true;
  if (bad) {
    for (std::size_t ei = 0; ei < ne; ++ei) {
      std::vector<double> local(mdim, 0.0);
      try {
        body(ei, local.data());
      } catch (const std::exception& ex) {
        throw std::runtime_error("constitutive evaluation failed on element " +
                                 std::to_string(ei) + " at t = " + std::to_string(s.t) + ": " +
                                 ex.what());
      }
      for (double v : local)
        if (!std::isfinite(v))
          throw std::runtime_error("non-finite quadrature value on element " + std::to_string(ei) +
                                   " at t = " + std::to_string(s.t));
    }
    throw std::runtime_error("non-finite stage reduction at t = " + std::to_string(s.t));
  }

  Stage st;
  st.gamma_dot.resize(k);
  for (int n = 0; n < k; ++n) st.gamma_dot[n] = out[static_cast<std::size_t>(n)] / disp_.lambda[n];
  st.delta_dot = Eigen::Map<const Eigen::VectorXd>(out.data() + k, l);
  st.beta_src = Eigen::Map<const Eigen::VectorXd>(out.data() + k + l, l);
  const double* agg = out.data() + k + 2 * l;
  st.galerkin_power = agg[0];
  st.dissipation = agg[1];
  st.m_stress = agg[2];
  st.ms_flow = agg[3];
  st.m_lift = agg[4];
  st.product_l1 = agg[5];
  st.source = agg[6];
  st.g_l2 = std::sqrt(std::max(agg[7], 0.0));
  return st;
}

Derivative Evolution::rhs(const State& s) const {
  Stage st = stage_eval(s);
  Derivative d;
  d.gamma_dot = std::move(st.gamma_dot);
  d.delta_dot = std::move(st.delta_dot);
  d.beta_dot = st.beta_src;
  for (int m = 0; m < comp_.count(); ++m) d.beta_dot[m] -= temp_.mu[m] * s.beta[m];
  return d;
}

State Evolution::advance(const State& s, double h, const Stage& s0, const Stage* s1) const {
  State r;
  r.t = s.t + h;
  if (s1 == nullptr) {
    r.gamma = s.gamma + h * s0.gamma_dot;
    r.delta = s.delta + h * s0.delta_dot;
  } else {
    r.gamma = s.gamma + 0.5 * h * (s0.gamma_dot + s1->gamma_dot);
    r.delta = s.delta + 0.5 * h * (s0.delta_dot + s1->delta_dot);
  }
  const int l = comp_.count();
  r.beta.resize(l);
  for (int m = 0; m < l; ++m) {
    const double z = -temp_.mu[m] * h;
    double b = std::exp(z) * s.beta[m] + h * phi1(z) * s0.beta_src[m];
    if (s1 != nullptr) b += h * phi2(z) * (s1->beta_src[m] - s0.beta_src[m]);
    r.beta[m] = b;
  }
  return r;
}

State Evolution::step_impl(const State& s, double h, int depth, const Stage* pre) const {
  constexpr int kMaxDepth = 20;
  const Stage s0 = pre != nullptr ? *pre : stage_eval(s);

  bool sub = false;
  State out;
  try {
    const State mid = advance(s, h, s0, nullptr);
    if (!mid.finite())
      throw std::runtime_error("non-finite predictor state at t = " + std::to_string(s.t));
    const Stage s1 = stage_eval(mid);
    // Accuracy guard: halve while the driving projections move more than 20%
    // across the step. Past the depth limit the step is accepted as is; only
    // non-finite values abort.
    sub = depth < kMaxDepth &&
          stage_change(s0.gamma_dot, s0.delta_dot, s0.beta_src, s1.gamma_dot, s1.delta_dot,
                       s1.beta_src) > 0.2;
    if (!sub) {
      out = advance(s, h, s0, &s1);
      if (!out.finite())
        throw std::runtime_error("non-finite corrected state at t = " + std::to_string(s.t));
    }
  } catch (const std::runtime_error&) {
    if (depth >= kMaxDepth) throw;
    sub = true;
  }
  if (sub) {
    const State half = step_impl(s, 0.5 * h, depth + 1, &s0);
    return step_impl(half, 0.5 * h, depth + 1, nullptr);
  }
  return out;
}

State Evolution::step(const State& s, double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  return step_impl(s, dt, 0, nullptr);
}

StepDiagnostics Evolution::make_diag(const State& s, const Stage& st, const Accum& acc) const {
  StepDiagnostics d;
  d.t = s.t;
  d.energy = 0.5 * s.delta.squaredNorm();
  d.galerkin_power = st.galerkin_power;
  d.dissipation = st.dissipation;
  d.source = st.source;
  const Eigen::VectorXd th = temp_.v * s.beta;
  d.theta_l1 = lumped_.dot(th.cwiseAbs());
  d.acc_galerkin_power = acc.galerkin_power;
  d.acc_m_stress = acc.m_stress;
  d.acc_ms_flow = acc.ms_flow;
  d.acc_m_lift = acc.m_lift;
  d.acc_product_l1 = acc.product_l1;
  d.acc_flow_l2 = acc.flow_l2;
  return d;
}

Trajectory Evolution::integrate(const State& s0, double t_final, double dt,
                                int output_stride) const {
  if (t_final < 0.0) throw std::invalid_argument("the horizon must be nonnegative");
  if (output_stride < 1) throw std::invalid_argument("output stride must be at least 1");
  long long nsteps = 0;
  if (t_final > 0.0) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    nsteps = std::llround(t_final / dt);
    if (nsteps < 1 ||
        std::abs(static_cast<double>(nsteps) * dt - t_final) > 1e-9 * std::max(1.0, t_final))
      throw std::invalid_argument("dt must divide the horizon");
  }

  Trajectory traj;
  State cur = s0;
  Accum acc;
  try {
    Stage st = stage_eval(cur);
    traj.states.push_back(cur);
    traj.diag.push_back(make_diag(cur, st, acc));
    for (long long n = 1; n <= nsteps; ++n) {
      State next = step_impl(cur, dt, 0, &st);
      // Snap to the exact grid so stored times carry no accumulated round-off.
      next.t = s0.t + static_cast<double>(n) * dt;
      const Stage stn = stage_eval(next);
      acc.galerkin_power += 0.5 * dt * (st.galerkin_power + stn.galerkin_power);
      acc.m_stress += 0.5 * dt * (st.m_stress + stn.m_stress);
      acc.ms_flow += 0.5 * dt * (st.ms_flow + stn.ms_flow);
      acc.m_lift += 0.5 * dt * (st.m_lift + stn.m_lift);
      acc.product_l1 += 0.5 * dt * (st.product_l1 + stn.product_l1);
      acc.flow_l2 += 0.5 * dt * (st.g_l2 * st.g_l2 + stn.g_l2 * stn.g_l2);
      cur = std::move(next);
      st = stn;
      if (n % output_stride == 0 || n == nsteps) {
        traj.states.push_back(cur);
        traj.diag.push_back(make_diag(cur, st, acc));
      }
    }
  } catch (const std::exception& ex) {
    traj.aborted = true;
    traj.abort_reason = ex.what();
  }
  return traj;
}

}  // namespace tvesim
