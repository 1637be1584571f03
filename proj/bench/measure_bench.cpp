// Compares the serial reference measurement loop against the OpenMP kernel.
//
//   ./bench/measure_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include "sirf/measure.hpp"

using namespace sirf;

namespace {

struct Workload {
    ClassParams params;
    NetlistGraph graph;
    Measurer measurer;

    Workload()
        : params(zynq_preset()), graph(build_netlist(params.graph)),
          measurer(params, graph, sample_population(params, graph, 8, 7), standard_corners(), 2,
                   3) {}
};

Workload& workload() {
    static Workload w;
    return w;
}

}  // namespace

static void BM_MeasureBlock(benchmark::State& state) {
    const bool parallel = state.range(0) != 0;
    const uint32_t count = uint32_t(state.range(1));
    Measurer& m = workload().measurer;
    for (auto _ : state) {
        CandidateBlock block = m.measure_block(0, count, parallel);
        benchmark::DoNotOptimize(block.dv.data());
    }
    // DVs per second: candidates x devices x corners x polarities
    state.SetItemsProcessed(int64_t(state.iterations()) * count * 8 * 6 * 2);
    state.SetLabel(parallel ? "openmp" : "serial");
}
BENCHMARK(BM_MeasureBlock)
    ->Args({0, 256})
    ->Args({1, 256})
    ->Args({0, 1024})
    ->Args({1, 1024})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

static void BM_PropagateOnly(benchmark::State& state) {
    Workload& w = workload();
    Propagator prop(w.graph);
    Challenge ch;
    DeviceGateDelays tables = w.measurer.tables(0, 0);
    uint64_t id = 0;
    for (auto _ : state) {
        challenge_into(w.graph, 2, Polarity::Rising, id++, ch);
        benchmark::DoNotOptimize(prop(tables, ch, false).picoseconds);
    }
    state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_PropagateOnly);

BENCHMARK_MAIN();
