// Serial reference kernels against their OpenMP versions.
#include <benchmark/benchmark.h>

#include "oelab/coupling.hpp"
#include "oelab/hyperbolicity.hpp"
#include "oelab/parallel.hpp"
#include "oelab/tiling.hpp"

using namespace oelab;

namespace {

void set_threads_arg(const benchmark::State& st) { set_threads(static_cast<int>(st.range(0))); }

// escape count of a Heisenberg generator from T_3 (65536 elements)
void BM_escape_serial(benchmark::State& st) {
    auto t = builtin("heis");
    t->materialize(3);
    for (auto _ : st) benchmark::DoNotOptimize(escape_count_enumerated(*t, HeisEl{1, 0, 0}, 3));
}
void BM_escape_parallel(benchmark::State& st) {
    set_threads_arg(st);
    auto t = builtin("heis");
    for (auto _ : st) benchmark::DoNotOptimize(escape_count_parallel(*t, HeisEl{1, 0, 0}, 3));
}

void BM_integrability_serial(benchmark::State& st) {
    auto C = make_coupling("zn:2", "zn:1:grouped:2", 24);
    for (auto _ : st)
        benchmark::DoNotOptimize(mc_integrability_serial(C, Side::Left, ZnEl{{1, 0}}, Gauge::power(0.4), 200000, 1));
}
void BM_integrability_parallel(benchmark::State& st) {
    set_threads_arg(st);
    auto C = make_coupling("zn:2", "zn:1:grouped:2", 24);
    for (auto _ : st)
        benchmark::DoNotOptimize(mc_integrability(C, Side::Left, ZnEl{{1, 0}}, Gauge::power(0.4), 200000, 1));
}

void BM_rips_naive(benchmark::State& st) {
    auto g = MetricGraph::grid(8, 8);
    for (auto _ : st) benchmark::DoNotOptimize(rips_delta_naive(g));
}
void BM_rips_pruned(benchmark::State& st) {
    set_threads_arg(st);
    auto g = MetricGraph::grid(8, 8);
    for (auto _ : st) benchmark::DoNotOptimize(rips_delta(g));
}

}  // namespace

BENCHMARK(BM_escape_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_escape_parallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_integrability_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_integrability_parallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_rips_naive)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rips_pruned)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
