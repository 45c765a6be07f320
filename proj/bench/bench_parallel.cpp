// Serial reference path against the OpenMP path for the main kernels. On a
// single core the two should tie; the gap grows with VF_THREADS.

#include <benchmark/benchmark.h>

#include "vf/model.hpp"
#include "vf/simulation.hpp"

namespace {

using vf::Execution;

const vf::Hyperparams kPhi{100, 0.4, 0.6, 0.5, 0.5, 1, 1};

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_KtonGrid(benchmark::State& state) {
  for (auto _ : state) {
    auto g = vf::kton_predictive_grid({125, 125}, {125, 125}, 10, kPhi, {}, mode(state));
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_KtonGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TotalSweep(benchmark::State& state) {
  std::vector<vf::CountPair> sweep;
  for (long j = 1; j <= 200; ++j) sweep.push_back({j, 0});
  for (long j = 1; j <= 200; ++j) sweep.push_back({200, j});
  for (auto _ : state) {
    auto s = vf::total_predictive_sweep({25, 25}, sweep, kPhi, {}, mode(state));
    benchmark::DoNotOptimize(s.data());
  }
}
BENCHMARK(BM_TotalSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BernoulliProcess(benchmark::State& state) {
  vf::SimConfig cfg;
  cfg.seed = 3;
  auto atoms = vf::sample_proposed_atoms(kPhi, cfg);
  for (auto _ : state) {
    auto d = vf::sample_bernoulli_process(atoms, {500, 500}, 11, mode(state));
    benchmark::DoNotOptimize(d.sizes());
  }
}
BENCHMARK(BM_BernoulliProcess)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
