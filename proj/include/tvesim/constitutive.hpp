#pragma once

#include <array>
#include <functional>
#include <vector>

#include "tvesim/expression.hpp"
#include "tvesim/orlicz.hpp"
#include "tvesim/tensor.hpp"

namespace tvesim {

// Flow rule G(theta, Td) mapping a deviatoric stress to a deviatoric plastic
// strain rate. Shipped family: scale * phi(theta) * |Td|^{p(x)-2} Td with the
// exponent shared with the scenario's N-function and phi a positive bounded
// temperature factor, evaluated at max(theta, 0) so transiently negative
// temperatures stay inside the certified band. A custom callback family
// exists so the validators can be pointed at deliberately broken models.
class GModel {
 public:
  using CustomFn = std::function<SymTensor3(double, const SymTensor3&, double, double)>;

  // phi is certified against [phi_lo, phi_hi] by dense sampling over
  // [0, theta_probe]; values outside the declared band reject the model.
  static GModel power_law(const NFunction& m, const Expression& phi, double phi_lo, double phi_hi,
                          double scale, double theta_probe = 64.0);
  static GModel custom(CustomFn fn, double scale);

  // td must be traceless; |trace| > 1e-10 |td| is an input error. The value
  // at td = 0 is 0 for every exponent.
  SymTensor3 eval(double theta, const SymTensor3& td, double x, double y) const;

  // scale * phi(max(theta, 0))
  double temperature_factor(double theta) const;

  bool is_power() const { return power_; }
  double scale() const { return scale_; }
  double phi_lo() const { return phi_lo_; }
  double phi_hi() const { return phi_hi_; }
  const NFunction& nfunction() const;

  // Largest constant with G : Td >= c (M(x, Td) + M*(x, G)) over the declared
  // phi band and the full exponent range; equals 1 when scale * phi == 1.
  // Zero for the custom family, which carries no analytic claim.
  double declared_c() const;

 private:
  bool power_ = true;
  NFunction m_ = NFunction::power_constant(2.0);
  Expression phi_;
  bool unit_factor_ = true;
  double phi_lo_ = 1.0, phi_hi_ = 1.0;
  double scale_ = 1.0;
  CustomFn fn_;
};

struct MonotonicityReport {
  double min_gap = 0.0;  // min of (G(t1) - G(t2)) : (t1 - t2) over the samples
  double worst_theta = 0.0;
  SymTensor3 worst_t1{}, worst_t2{};
};

MonotonicityReport check_monotonicity(const GModel& g, const std::vector<std::array<double, 2>>& xs,
                                      int samples, unsigned long long seed);

struct CoercivityReport {
  double declared = 0.0;       // analytic bound for the power family
  double sampled_inf = 0.0;    // inf of G:Td / (M(Td) + M*(G)) over all samples
  double theta_inf_min = 0.0;  // smallest per-theta infimum on the theta grid
  double theta_inf_max = 0.0;  // largest per-theta infimum on the theta grid
  bool ok() const { return sampled_inf > 0.0; }
};

// Random deviators on a fixed theta grid spanning the clamp region and a wide
// positive band. For the matched power family the ratio is magnitude-free, so
// the sampled infimum reproduces the declared constant up to round-off.
CoercivityReport check_coercivity(const GModel& g, const NFunction& m,
                                  const ComplementaryNFunction& ms,
                                  const std::vector<std::array<double, 2>>& xs, int samples,
                                  unsigned long long seed);

// min over samples of G : Td; nonnegative for every monotone family with
// G(theta, 0) = 0.
double check_dissipation(const GModel& g, const std::vector<std::array<double, 2>>& xs, int samples,
                         unsigned long long seed);

struct ContinuityReport {
  double step = 0.0;        // probe size, absolute in both arguments
  double stress_mod = 0.0;  // sup |G(theta, td + d) - G(theta, td)|, |d| = step
  double theta_mod = 0.0;   // sup |G(theta + step, td) - G(theta, td)|
};

ContinuityReport check_continuity(const GModel& g, const std::vector<std::array<double, 2>>& xs,
                                  int samples, double step, unsigned long long seed);

}  // namespace tvesim
