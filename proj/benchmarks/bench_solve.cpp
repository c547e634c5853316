#include <benchmark/benchmark.h>

#include "compmdp/benchgen.hpp"
#include "compmdp/exact.hpp"
#include "compmdp/solve.hpp"

using namespace compmdp;

namespace {

OpenMdp small_room() { return gen_room_leaf(RoomParams{true, false, 7}, false, 0); }

TargetWeight<double> room_targets(const OpenMdp& room) {
    return {room.exits(), {1.0, 0.5}};
}

void BM_BellmanSweep(benchmark::State& state) {
    OpenMdp room = gen_room_leaf(RoomParams{true, false, static_cast<uint32_t>(state.range(0))},
                                 false, 0);
    TargetWeight<double> tw = room_targets(room);
    std::vector<double> f(room.approx_mdp().state_count(), 0.0);
    for (auto _ : state) {
        f = bellman_apply(room.approx_mdp(), tw, f);
        benchmark::DoNotOptimize(f.data());
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<int64_t>(room.approx_mdp().state_count()));
}
BENCHMARK(BM_BellmanSweep)->Arg(7)->Arg(25)->Arg(101);

void BM_OviRoom(benchmark::State& state) {
    OpenMdp room = small_room();
    TargetWeight<double> tw = room_targets(room);
    for (auto _ : state) {
        OviResult r = ovi_solve(room.approx_mdp(), tw, 1e-5);
        benchmark::DoNotOptimize(r.lower.data());
    }
}
BENCHMARK(BM_OviRoom);

void BM_PolicyIterationRoom(benchmark::State& state) {
    OpenMdp room = small_room();
    TargetWeight<Rational> tw{room.exits(), {Rational(1), Rational(1, 2)}};
    for (auto _ : state) {
        ExactSolution s = policy_iteration_exact(room.exact_mdp(), tw);
        benchmark::DoNotOptimize(s.values.data());
    }
}
BENCHMARK(BM_PolicyIterationRoom);

void BM_McReachabilityRoom(benchmark::State& state) {
    OpenMdp room = small_room();
    TargetWeight<Rational> tw{room.exits(), {Rational(1), Rational(1, 2)}};
    ExactSolution s = policy_iteration_exact(room.exact_mdp(), tw);
    for (auto _ : state) {
        auto rows = mc_reachability(room.exact_mdp(), s.sched, room.exits());
        benchmark::DoNotOptimize(rows.data());
    }
}
BENCHMARK(BM_McReachabilityRoom);

}  // namespace
