#include <benchmark/benchmark.h>

#include "compmdp/benchgen.hpp"
#include "compmdp/engine.hpp"

using namespace compmdp;

namespace {

void BM_FlattenRooms(benchmark::State& state) {
    ModelDocument doc =
        gen_diagram(parse_bench_spec("rooms:" + std::to_string(state.range(0)) + ":rms"));
    StringDiagram d = doc.build();
    for (auto _ : state) {
        OpenMdp flat = flatten(d);
        benchmark::DoNotOptimize(flat.exact_mdp().state_count());
    }
}
BENCHMARK(BM_FlattenRooms)->Arg(2)->Arg(3)->Arg(5);

void BM_IndexRooms(benchmark::State& state) {
    ModelDocument doc =
        gen_diagram(parse_bench_spec("rooms:" + std::to_string(state.range(0)) + ":rms"));
    StringDiagram d = doc.build();
    for (auto _ : state) {
        ComponentIndex index = index_diagram(d);
        benchmark::DoNotOptimize(index.components.size());
    }
}
BENCHMARK(BM_IndexRooms)->Arg(3)->Arg(10);

void BM_EngineChainsLoop(benchmark::State& state) {
    ModelDocument doc = gen_diagram(
        parse_bench_spec("chainsloop:" + std::to_string(state.range(0)) + ":dice2"));
    StringDiagram d = doc.build();
    ComponentIndex index = index_diagram(d);
    ResolvedQuery q = resolve_query(doc.query, index);
    CviConfig cfg;
    cfg.gsc = GscKind::BottomUp;
    cfg.cache = CacheKind::Pareto;
    for (auto _ : state) {
        CviResult r = cvi_run(d, q.weights, cfg);
        benchmark::DoNotOptimize(r.entrances.data());
    }
}
BENCHMARK(BM_EngineChainsLoop)->Arg(4)->Arg(10);

}  // namespace
