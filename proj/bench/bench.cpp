#include <benchmark/benchmark.h>

#include "dpsim/experiment.hpp"
#include "dpsim/oracle.hpp"

using namespace dpsim;

namespace {

std::vector<ExperimentConfig> batch(int runs) {
    std::vector<ExperimentConfig> cfgs;
    for (int i = 0; i < runs; ++i) {
        ExperimentConfig c;
        c.duration = 600.0;
        c.seed = static_cast<std::uint64_t>(i + 1);
        c.policy = i % 2 == 0 ? "full" : "b6";
        cfgs.push_back(c);
    }
    return cfgs;
}

void BM_BatchSerial(benchmark::State& state) {
    const auto cfgs = batch(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_batch_serial(cfgs));
}

void BM_BatchParallel(benchmark::State& state) {
    const auto cfgs = batch(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_batch_parallel(cfgs));
}

void BM_TinySuiteSerial(benchmark::State& state) {
    const CostProfile prof = load_preset("flux").profile;
    for (auto _ : state) benchmark::DoNotOptimize(tiny_suite_serial(prof, static_cast<int>(state.range(0)), 7));
}

void BM_TinySuiteParallel(benchmark::State& state) {
    const CostProfile prof = load_preset("flux").profile;
    for (auto _ : state) benchmark::DoNotOptimize(tiny_suite_parallel(prof, static_cast<int>(state.range(0)), 7));
}

}  // namespace

BENCHMARK(BM_BatchSerial)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BatchParallel)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TinySuiteSerial)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TinySuiteParallel)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
