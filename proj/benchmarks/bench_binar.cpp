#include <benchmark/benchmark.h>

#include "binar/estimators.hpp"
#include "binar/limits.hpp"
#include "binar/tree.hpp"

using namespace binar;

static void BM_SimulateTree(benchmark::State& state) {
    const int depth = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_tree(reference_params(), depth, RngStream(seed++, 0)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(subtree_size(depth)));
}
BENCHMARK(BM_SimulateTree)->Arg(10)->Arg(14)->Arg(18)->Unit(benchmark::kMillisecond);

static void BM_SampleT(benchmark::State& state) {
    const LimitVariableSampler sampler(reference_params(), 1e-8);
    RngStream root(1, 0);
    std::uint64_t i = 0;
    for (auto _ : state) {
        RngStream r = root.derive(i++);
        benchmark::DoNotOptimize(sampler(r));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SampleT);

static void BM_EstimateAll(benchmark::State& state) {
    const int depth = static_cast<int>(state.range(0));
    const BinarTree tree = simulate_tree(reference_params(), depth, RngStream(3, 0));
    for (auto _ : state) benchmark::DoNotOptimize(estimate_all(tree, depth));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(subtree_size(depth)));
}
BENCHMARK(BM_EstimateAll)->Arg(10)->Arg(14)->Arg(18)->Unit(benchmark::kMillisecond);

static void BM_LimitMatricesMc(benchmark::State& state) {
    const auto draws = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(limit_matrices_mc(reference_params(), draws, RngStream(5, 0)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(draws));
}
BENCHMARK(BM_LimitMatricesMc)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
