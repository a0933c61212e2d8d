#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "ustat/combinatorics.hpp"
#include "ustat/distribution.hpp"
#include "ustat/holder.hpp"
#include "ustat/incomplete.hpp"
#include "ustat/kernel.hpp"
#include "ustat/tails.hpp"
#include "ustat/ustatistic.hpp"

using namespace ustat;

static void BM_CompleteUStat(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto m = static_cast<std::size_t>(state.range(1));
    const Kernel h = builtin_kernel("product", {m, 0});
    const auto x = sample_iid(Distribution::gaussian(0, 1), n, Stream(1));
    for (auto _ : state) benchmark::DoNotOptimize(complete_ustat(h, x, n, {1, false, std::nullopt}).value);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count_tuples(n, m)));
}
BENCHMARK(BM_CompleteUStat)->Args({256, 2})->Args({64, 3})->Args({32, 4});

static void BM_RunningMax(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Kernel h = builtin_kernel("product");
    const auto x = sample_iid(Distribution::rademacher(), n, Stream(2));
    for (auto _ : state) benchmark::DoNotOptimize(running_max_norms(h, x, n, std::nullopt, 1));
}
BENCHMARK(BM_RunningMax)->Arg(128)->Arg(512);

static void BM_HolderNorm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<Point> knots{{0.0}};
    const Stream s(3);
    for (std::size_t k = 1; k <= n; ++k) knots.push_back({knots.back()[0] + s.normal(k)});
    const PartialSumPath path(knots, 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(holder_norm(path, 0.3, std::nullopt, 1));
}
BENCHMARK(BM_HolderNorm)->Arg(256)->Arg(1024)->Arg(4096);

static void BM_DrawDesign(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SamplingDesign designs[] = {SamplingDesign::without_replacement(n), SamplingDesign::with_replacement(n),
                                      SamplingDesign::bernoulli(static_cast<double>(n) / static_cast<double>(count_tuples(n, 2)))};
    const auto& design = designs[state.range(1)];
    std::uint64_t r = 0;
    for (auto _ : state) benchmark::DoNotOptimize(draw_design(design, n, 2, Stream(4).child(r++)).size());
    state.SetLabel(design.describe());
}
BENCHMARK(BM_DrawDesign)->ArgsProduct({{256, 4096}, {0, 1, 2}});

static void BM_TailIntegral(benchmark::State& state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    std::vector<double> y(size);
    const Stream s(5);
    for (std::size_t i = 0; i < size; ++i) y[i] = -std::log(s.uniform_open(i));
    const EmpiricalTail tail(y);
    for (auto _ : state) benchmark::DoNotOptimize(tail.tail_integral(0.5, 2.5));
}
BENCHMARK(BM_TailIntegral)->Arg(1000)->Arg(100000);
BENCHMARK_MAIN();
