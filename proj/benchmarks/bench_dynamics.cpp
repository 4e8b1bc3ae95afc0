#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "iontrap/dynamics.hpp"
#include "iontrap/field_model.hpp"
#include "iontrap/mathieu.hpp"
#include "iontrap/spectral.hpp"

using namespace iontrap;

namespace {

void BM_BetaFloquet(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(beta_floquet(0.01, 0.4));
}
BENCHMARK(BM_BetaFloquet);

void BM_BetaFourthOrder(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(beta_fourth_order(0.01, 0.4));
}
BENCHMARK(BM_BetaFourthOrder);

void BM_Trajectory(benchmark::State& state) {
  const double r0 = 1e-3, z0 = r0 / std::sqrt(2.0), omega = 2 * std::numbers::pi * 10e6;
  const auto ion = IonSpecies::from_isotope("Ca-40");
  const AnalyticQuadrupoleField field(r0, z0);
  DriveWaveform drive;
  drive.channels = {{0.0, 163.51, omega, 0.0}, {}, {}};
  IntegrationOptions o;
  o.steps_per_rf_period = static_cast<int>(state.range(0));
  const double duration = 1e-4;
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_trajectory(initial_state_from_energy(0.01, ion), field, drive, duration, o));
  state.counters["steps"] = duration * 10e6 * static_cast<double>(state.range(0));
}
BENCHMARK(BM_Trajectory)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_PowerSpectrum(benchmark::State& state) {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(power_spectrum(x, 1e-8));
}
BENCHMARK(BM_PowerSpectrum)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

} // namespace
