#include "eccm/pap.hpp"
#include "eccm/presets.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_SolveLevel(benchmark::State& state, eccm::StrategyClass mode) {
  const eccm::PapInstance inst(eccm::presets::reference_channel(),
                               eccm::presets::reference_params(), eccm::CovarianceSummary(1.0),
                               static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eccm::solve_level(inst, mode));
}

void BM_SolvePap(benchmark::State& state, eccm::StrategyClass mode) {
  const auto channel = eccm::presets::reference_channel();
  const auto params = eccm::presets::reference_params();
  for (auto _ : state) {
    benchmark::DoNotOptimize(eccm::solve_pap(channel, params, eccm::CovarianceSummary(1.0), mode));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_SolveLevel, full, eccm::StrategyClass::Full)->DenseRange(0, 3);
BENCHMARK_CAPTURE(BM_SolveLevel, relaxed, eccm::StrategyClass::Relaxed)->DenseRange(0, 3);
BENCHMARK_CAPTURE(BM_SolveLevel, affine, eccm::StrategyClass::Affine)->DenseRange(0, 3);
BENCHMARK_CAPTURE(BM_SolvePap, full, eccm::StrategyClass::Full);
BENCHMARK_CAPTURE(BM_SolvePap, affine, eccm::StrategyClass::Affine);
