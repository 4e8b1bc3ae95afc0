#include <benchmark/benchmark.h>

#include <memory>

#include "iontrap/field_bem.hpp"
#include "iontrap/field_cache.hpp"
#include "iontrap/field_fdm.hpp"
#include "iontrap/geometry.hpp"

using namespace iontrap;

namespace {

std::shared_ptr<const TrapGeometry> ideal(int resolution) {
  return std::make_shared<const TrapGeometry>(build_ideal_quadrupole(1e-3, resolution));
}

void BM_BemAssemble(benchmark::State& state) {
  const auto g = ideal(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_influence_matrix(*g));
  state.counters["panels"] = static_cast<double>(g->panels().size());
}
BENCHMARK(BM_BemAssemble)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BemSolve(benchmark::State& state) {
  const auto g = ideal(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(BemField::solve(g));
  state.counters["panels"] = static_cast<double>(g->panels().size());
}
BENCHMARK(BM_BemSolve)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BemFieldEvaluation(benchmark::State& state) {
  const auto f = BemField::solve(ideal(32));
  const double volts[] = {1.0, 0.0, 0.0};
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f->field({x, 1e-4, 2e-4}, volts));
    x = x > 2e-4 ? 0.0 : x + 1e-6;
  }
}
BENCHMARK(BM_BemFieldEvaluation);

void BM_FdmSolve(benchmark::State& state) {
  const auto g = ideal(32);
  const auto spec = GridSpec::around(*g, static_cast<int>(state.range(0)));
  const double volts[] = {1.0, 0.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(solve_grid(*g, volts, spec));
}
BENCHMARK(BM_FdmSolve)->Arg(33)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

void BM_CachedFieldEvaluation(benchmark::State& state) {
  const auto cache = std::make_shared<CachedField>(BemField::solve(ideal(32)), Vec3{-3e-4, -3e-4, -2e-4},
                                                   Vec3{3e-4, 3e-4, 2e-4}, 17);
  const double volts[] = {1.0, 0.0, 0.0};
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cache->field({x, 1e-4, 5e-5}, volts));
    x = x > 2e-4 ? 0.0 : x + 1e-6;
  }
}
BENCHMARK(BM_CachedFieldEvaluation);

} // namespace
