// Serial reference versus OpenMP fan-out on the two experiment workloads.

#include "lqts/experiment.hpp"
#include "lqts/parallel.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace lqts;

void BM_StabilizationSweep(benchmark::State& state) {
  SweepConfig cfg;
  cfg.scenario = builtin_scenario("x29a");
  cfg.taus = {4.0, 8.0};
  cfg.reps = 16;
  cfg.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_stabilization_sweep(cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.reps * static_cast<int64_t>(cfg.taus.size()));
}

void BM_RegretExperiment(benchmark::State& state) {
  RegretConfig cfg;
  cfg.scenario = builtin_scenario("x29a");
  cfg.policies = {PolicyKind::kThompson, PolicyKind::kRandomizedEstimate};
  cfg.horizon = 60.0;
  cfg.reps = 8;
  cfg.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_regret_experiment(cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.reps);
}

}  // namespace

// threads = 1 takes the serial reference path.
BENCHMARK(BM_StabilizationSweep)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegretExperiment)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
