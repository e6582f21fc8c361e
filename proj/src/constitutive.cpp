#include "tvesim/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tvesim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Random traceless tensor with log-uniform magnitude in [lo, hi].
SymTensor3 random_deviator(std::mt19937_64& rng, double lo, double hi) {
  std::normal_distribution<double> n01(0.0, 1.0);
  SymTensor3 t;
  for (std::size_t i = 0; i < 6; ++i) t[i] = n01(rng);
  t = t.dev();
  double n = tnorm(t);
  if (n == 0.0) {
    t[0] = 1.0;
    t[1] = -1.0;
    n = tnorm(t);
  }
  double mag = lo;
  if (hi > lo) {
    std::uniform_real_distribution<double> umag(std::log(lo), std::log(hi));
    mag = std::exp(umag(rng));
  }
  return t * (mag / n);
}

// Ratio G:T / (M(T) + M*(G)) for the power family depends on (p, a) only.
double coercivity_ratio(double p, double a) {
  const double pc = p / (p - 1.0);
  return a / (1.0 / p + std::pow(a, pc) / pc);
}

}  // namespace

GModel GModel::power_law(const NFunction& m, const Expression& phi, double phi_lo, double phi_hi,
                         double scale, double theta_probe) {
  if (!m.is_power()) throw std::invalid_argument("power-law flow rule needs a power N-function");
  if (!(scale > 0.0)) throw std::invalid_argument("flow rule scale must be positive");
  if (!(phi_lo > 0.0) || !(phi_hi >= phi_lo))
    throw std::invalid_argument("temperature factor band must satisfy 0 < lo <= hi");
  if (!(theta_probe > 0.0)) throw std::invalid_argument("temperature probe range must be positive");

  GModel g;
  g.power_ = true;
  g.m_ = m;
  g.phi_ = phi;
  g.phi_lo_ = phi_lo;
  g.phi_hi_ = phi_hi;
  g.scale_ = scale;
  g.unit_factor_ = phi.empty();
  if (!phi.empty()) {
    const double tol = 1e-12 * phi_hi;
    const int n = 2048;
    for (int i = 0; i <= n; ++i) {
      EvalContext ctx;
      ctx.theta = theta_probe * static_cast<double>(i) / n;
      const double v = phi.eval(ctx);
      if (!(v >= phi_lo - tol && v <= phi_hi + tol)) {
        std::ostringstream os;
        os << "temperature factor leaves its declared band [" << phi_lo << ", " << phi_hi
           << "]: phi(" << ctx.theta << ") = " << v;
        throw std::invalid_argument(os.str());
      }
    }
  }
  return g;
}

GModel GModel::custom(CustomFn fn, double scale) {
  if (!fn) throw std::invalid_argument("custom flow rule needs a callback");
  if (!(scale > 0.0)) throw std::invalid_argument("flow rule scale must be positive");
  GModel g;
  g.power_ = false;
  g.fn_ = std::move(fn);
  g.scale_ = scale;
  return g;
}

SymTensor3 GModel::eval(double theta, const SymTensor3& td, double x, double y) const {
  const double n = tnorm(td);
  if (std::abs(td.trace()) > 1e-10 * n)
    throw std::invalid_argument("flow rule input is not deviatoric");
  if (!power_) return fn_(theta, td, x, y);
  if (n == 0.0) return SymTensor3{};
  const double p = m_.exponent(x, y);
  return td * (temperature_factor(theta) * std::pow(n, p - 2.0));
}

double GModel::temperature_factor(double theta) const {
  if (unit_factor_) return scale_;
  EvalContext ctx;
  ctx.theta = std::max(theta, 0.0);
  return scale_ * phi_.eval(ctx);
}

const NFunction& GModel::nfunction() const {
  if (!power_) throw std::logic_error("custom flow rule has no N-function");
  return m_;
}

double GModel::declared_c() const {
  if (!power_) return 0.0;
  const double alo = scale_ * phi_lo_;
  const double ahi = scale_ * phi_hi_;
  const double p_lo = m_.p_min();
  const double p_hi = m_.p_max();
  double c = kInf;
  const int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const double p = p_lo + (p_hi - p_lo) * static_cast<double>(i) / n;
    // the ratio peaks at a = 1, so the band minimum sits at an endpoint
    c = std::min(c, std::min(coercivity_ratio(p, alo), coercivity_ratio(p, ahi)));
  }
  return c;
}

MonotonicityReport check_monotonicity(const GModel& g, const std::vector<std::array<double, 2>>& xs,
                                      int samples, unsigned long long seed) {
  if (xs.empty()) throw std::invalid_argument("monotonicity check needs sample points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> utheta(-2.0, 66.0);
  MonotonicityReport rep;
  rep.min_gap = kInf;
  for (int i = 0; i < samples; ++i) {
    const auto& p = xs[static_cast<std::size_t>(i) % xs.size()];
    const double theta = utheta(rng);
    const SymTensor3 t1 = random_deviator(rng, 1e-3, 1e3);
    const SymTensor3 t2 = random_deviator(rng, 1e-3, 1e3);
    const SymTensor3 g1 = g.eval(theta, t1, p[0], p[1]);
    const SymTensor3 g2 = g.eval(theta, t2, p[0], p[1]);
    const double gap = ddot(g1 - g2, t1 - t2);
    if (gap < rep.min_gap) {
      rep.min_gap = gap;
      rep.worst_theta = theta;
      rep.worst_t1 = t1;
      rep.worst_t2 = t2;
    }
  }
  return rep;
}

CoercivityReport check_coercivity(const GModel& g, const NFunction& m,
                                  const ComplementaryNFunction& ms,
                                  const std::vector<std::array<double, 2>>& xs, int samples,
                                  unsigned long long seed) {
  if (xs.empty()) throw std::invalid_argument("coercivity check needs sample points");
  std::mt19937_64 rng(seed);
  CoercivityReport rep;
  rep.declared = g.declared_c();
  rep.sampled_inf = kInf;
  rep.theta_inf_min = kInf;
  rep.theta_inf_max = -kInf;
  const int n_theta = 17;
  const int per_theta = std::max(1, samples / n_theta);
  for (int it = 0; it < n_theta; ++it) {
    // grid spans the clamp region and a wide positive band
    const double theta = -2.0 + 66.0 * static_cast<double>(it) / (n_theta - 1);
    double inf_theta = kInf;
    for (int i = 0; i < per_theta; ++i) {
      const auto& p = xs[static_cast<std::size_t>(i) % xs.size()];
      const SymTensor3 td = random_deviator(rng, 1e-3, 1e3);
      const SymTensor3 gv = g.eval(theta, td, p[0], p[1]);
      const double num = ddot(gv, td);
      const double den = m.eval(p[0], p[1], td) + ms.eval(p[0], p[1], gv);
      if (den > 0.0) inf_theta = std::min(inf_theta, num / den);
    }
    rep.sampled_inf = std::min(rep.sampled_inf, inf_theta);
    rep.theta_inf_min = std::min(rep.theta_inf_min, inf_theta);
    rep.theta_inf_max = std::max(rep.theta_inf_max, inf_theta);
  }
  return rep;
}

double check_dissipation(const GModel& g, const std::vector<std::array<double, 2>>& xs, int samples,
                         unsigned long long seed) {
  if (xs.empty()) throw std::invalid_argument("dissipation check needs sample points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> utheta(-2.0, 66.0);
  double lo = kInf;
  for (int i = 0; i < samples; ++i) {
    const auto& p = xs[static_cast<std::size_t>(i) % xs.size()];
    const SymTensor3 td = random_deviator(rng, 1e-3, 1e3);
    lo = std::min(lo, ddot(g.eval(utheta(rng), td, p[0], p[1]), td));
  }
  return lo;
}

ContinuityReport check_continuity(const GModel& g, const std::vector<std::array<double, 2>>& xs,
                                  int samples, double step, unsigned long long seed) {
  if (xs.empty()) throw std::invalid_argument("continuity check needs sample points");
  if (!(step > 0.0)) throw std::invalid_argument("continuity probe must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> utheta(0.0, 32.0);
  ContinuityReport rep;
  rep.step = step;
  for (int i = 0; i < samples; ++i) {
    const auto& p = xs[static_cast<std::size_t>(i) % xs.size()];
    const double theta = utheta(rng);
    // the first probe sits at the origin, where the power family is merely
    // Hoelder continuous for p < 2
    SymTensor3 td{};
    if (i > 0) td = random_deviator(rng, 1e-2, 1e2);
    SymTensor3 d = random_deviator(rng, 1.0, 1.0) * step;
    const SymTensor3 g0 = g.eval(theta, td, p[0], p[1]);
    rep.stress_mod = std::max(rep.stress_mod, tnorm(g.eval(theta, td + d, p[0], p[1]) - g0));
    rep.theta_mod = std::max(rep.theta_mod, tnorm(g.eval(theta + step, td, p[0], p[1]) - g0));
  }
  return rep;
}

}  // namespace tvesim
