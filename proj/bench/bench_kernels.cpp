#include <benchmark/benchmark.h>

#include "ionnems/kernels.hpp"

using namespace ionnems;

namespace {

const SystemParams kSystem = SystemParams::resonant(0.5, 3.0, 0.05);

std::vector<double> grid(const benchmark::State& state) {
  return uniform_grid(10.0, 10.0 / static_cast<double>(state.range(0)));
}

template <auto Kernel>
void closed(benchmark::State& state) {
  const std::vector<double> times = grid(state);
  const CovarianceMatrix vacuum = CovarianceMatrix::vacuum(3);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(vacuum, kSystem, times));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(times.size()));
}

template <auto Kernel>
void measure(benchmark::State& state) {
  const std::vector<double> times = grid(state);
  const auto gammas = closed_covariances_parallel(CovarianceMatrix::vacuum(3), kSystem, times);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(times, gammas));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(times.size()));
}

}  // namespace

BENCHMARK(closed<closed_covariances_serial>)->Name("closed_covariances/serial")->RangeMultiplier(4)->Range(256, 16384);
BENCHMARK(closed<closed_covariances_parallel>)->Name("closed_covariances/parallel")->RangeMultiplier(4)->Range(256, 16384)->UseRealTime();
BENCHMARK(measure<measure_trajectory_serial>)->Name("measure_trajectory/serial")->RangeMultiplier(4)->Range(256, 16384);
BENCHMARK(measure<measure_trajectory_parallel>)->Name("measure_trajectory/parallel")->RangeMultiplier(4)->Range(256, 16384)->UseRealTime();

BENCHMARK_MAIN();
