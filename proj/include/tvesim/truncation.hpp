#pragma once

#include <algorithm>
#include <cmath>

namespace tvesim {

// Pointwise clamp to [-K, K].
inline double truncate(double K, double r) { return std::clamp(r, -K, K); }

// Even primitive of the truncation: r^2/2 inside the band, linear growth
// K(|r| - K) + K^2/2 outside.
inline double tilde_truncate(double K, double r) {
  const double a = std::abs(r);
  return a <= K ? 0.5 * r * r : 0.5 * K * K + K * (a - K);
}

}  // namespace tvesim
