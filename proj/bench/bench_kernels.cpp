#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tvesim/fem.hpp"
#include "tvesim/kernels.hpp"
#include "tvesim/mesh.hpp"
#include "tvesim/orlicz.hpp"

using namespace tvesim;

namespace {

struct Fixture {
  Mesh mesh = build_mesh(1.0, 1.0, 48, 48);
  TriangleRule rule = triangle_rule(4);
  NFunction m = NFunction::power(Expression::parse("2 + 0.5*sin(pi*x)"), 1.0, 1.0);
  MaterialField mat = MaterialField::constant_isotropic(1.0, 1.0);
  SlabField field;

  Fixture() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<SymTensor3> vals(static_cast<std::size_t>(mesh.n_elems()));
    for (auto& t : vals)
      for (int i = 0; i < 6; ++i) t[static_cast<std::size_t>(i)] = u(rng);
    field = SlabField::space(std::move(vals));
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void bm_modular(benchmark::State& state, kernels::Exec exec) {
  auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(modular(f.m, f.field, f.mesh, f.rule, exec));
  }
}

void bm_assembly(benchmark::State& state, kernels::Exec exec) {
  auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(stiffness_elastic(f.mesh, f.mat, f.rule, exec));
  }
}

}  // namespace

BENCHMARK_CAPTURE(bm_modular, serial, kernels::Exec::serial);
BENCHMARK_CAPTURE(bm_modular, parallel, kernels::Exec::parallel);
BENCHMARK_CAPTURE(bm_assembly, serial, kernels::Exec::serial);
BENCHMARK_CAPTURE(bm_assembly, parallel, kernels::Exec::parallel);

BENCHMARK_MAIN();
