#include "eccm/presets.hpp"
#include "eccm/riccati.hpp"
#include "eccm/sim.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_AreBarrage(benchmark::State& state) {
  const auto model = eccm::presets::barrage_model();
  for (auto _ : state) benchmark::DoNotOptimize(eccm::solve_are_barrage(model, 1.0));
}

void BM_AreDeception(benchmark::State& state) {
  const auto model = eccm::presets::deception_model();
  for (auto _ : state) benchmark::DoNotOptimize(eccm::solve_are_deception(model, 1.0));
}

void BM_MonteCarlo(benchmark::State& state) {
  const eccm::TrackingModel model = eccm::presets::barrage_model();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        eccm::monte_carlo_covariance(model, 1.0, static_cast<int>(state.range(0)), 200, 1));
  }
}

void BM_Simulation(benchmark::State& state) {
  const auto config = eccm::presets::barrage_config();
  for (auto _ : state) benchmark::DoNotOptimize(eccm::run_simulation(config));
}

}  // namespace

BENCHMARK(BM_AreBarrage);
BENCHMARK(BM_AreDeception);
BENCHMARK(BM_MonteCarlo)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Simulation)->Unit(benchmark::kMillisecond);
