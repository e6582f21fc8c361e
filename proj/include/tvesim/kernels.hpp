#pragma once

#include <cstddef>
#include <vector>

namespace tvesim::kernels {

// Execution policy for the quadrature and assembly kernels. Both drivers use
// the same chunked summation: partial sums are produced per fixed-size chunk
// of items and combined in chunk order, so the result is bitwise identical
// between serial and parallel execution and independent of the thread count.
enum class Exec { serial, parallel };

inline constexpr std::size_t kChunk = 64;

namespace detail {
inline std::size_t num_chunks(std::size_t n) { return (n + kChunk - 1) / kChunk; }
}  // namespace detail

// Accumulates sum_{i<n} fn(i).
template <typename Fn>
double reduce_sum(std::size_t n, Exec exec, Fn&& fn) {
  const std::size_t nc = detail::num_chunks(n);
  std::vector<double> partial(nc, 0.0);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < static_cast<long long>(nc); ++c) {
      const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
      const std::size_t hi = lo + kChunk < n ? lo + kChunk : n;
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += fn(i);
      partial[static_cast<std::size_t>(c)] = s;
    }
  } else {
    for (std::size_t c = 0; c < nc; ++c) {
      const std::size_t lo = c * kChunk;
      const std::size_t hi = lo + kChunk < n ? lo + kChunk : n;
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += fn(i);
      partial[c] = s;
    }
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

// Accumulates an m-vector of sums; fn(i, acc) adds item i into acc[0..m).
// out must hold m doubles and is overwritten.
template <typename Fn>
void reduce_vec(std::size_t n, std::size_t m, Exec exec, Fn&& fn, double* out) {
  const std::size_t nc = detail::num_chunks(n);
  std::vector<double> partial(nc * m, 0.0);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < static_cast<long long>(nc); ++c) {
      const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
      const std::size_t hi = lo + kChunk < n ? lo + kChunk : n;
      double* acc = partial.data() + static_cast<std::size_t>(c) * m;
      for (std::size_t i = lo; i < hi; ++i) fn(i, acc);
    }
  } else {
    for (std::size_t c = 0; c < nc; ++c) {
      const std::size_t lo = c * kChunk;
      const std::size_t hi = lo + kChunk < n ? lo + kChunk : n;
      double* acc = partial.data() + c * m;
      for (std::size_t i = lo; i < hi; ++i) fn(i, acc);
    }
  }
  for (std::size_t j = 0; j < m; ++j) out[j] = 0.0;
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t j = 0; j < m; ++j) out[j] += partial[c * m + j];
}

}  // namespace tvesim::kernels
