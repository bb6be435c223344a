// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include "ftme/dynamics.hpp"
#include "ftme/entropy.hpp"
#include "ftme/lcs.hpp"

using namespace ftme;

namespace {

const std::vector<Mat> kMats{mat2(2.0, 0.0, 0.0, 0.5)};

void BM_MonteCarloSerial(benchmark::State& state)
{
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::count_in_intersection_serial(kMats, 2, n, 1));
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void BM_MonteCarloParallel(benchmark::State& state)
{
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::count_in_intersection_parallel(kMats, 2, n, 1));
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void field_bench(benchmark::State& state, Exec exec)
{
    const int nodes = static_cast<int>(state.range(0));
    const Grid2D g{-2.0, 2.0, -2.0, 2.0, nodes, nodes};
    const VectorField f = make_field(Parabola{1.0, 1.0});
    for (auto _ : state) {
        benchmark::DoNotOptimize(weighted_ftme_field(f, g, 2.0, 200, AlphaPolicy::stretching(), exec).values.data());
    }
    state.SetItemsProcessed(state.iterations() * nodes * nodes);
}

void BM_WeightedFieldSerial(benchmark::State& state) { field_bench(state, Exec::serial); }
void BM_WeightedFieldParallel(benchmark::State& state) { field_bench(state, Exec::parallel); }

}  // namespace

BENCHMARK(BM_MonteCarloSerial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeightedFieldSerial)->Arg(101)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeightedFieldParallel)->Arg(101)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
