#include <benchmark/benchmark.h>

#include <random>

#include "compmdp/pareto.hpp"

using namespace compmdp;

namespace {

std::vector<Rational> random_weight(std::mt19937_64& rng, uint32_t dim) {
    std::vector<Rational> w(dim);
    for (auto& x : w) x = Rational(static_cast<int>(rng() % 9), 8);
    return w;
}

void seed_cache(ParetoCache& cache, uint32_t dim, int updates) {
    std::mt19937_64 rng(1);
    cache.register_leaf("L", 1, dim);
    for (int k = 0; k < updates; ++k) {
        std::vector<Rational> w = random_weight(rng, dim);
        // synthetic but consistent data: point on a scaled simplex, plane above it
        std::vector<Rational> p(dim);
        Rational bound;
        for (uint32_t i = 0; i < dim; ++i) {
            p[i] = Rational(1 + static_cast<int>(rng() % 4), 8 * dim);
            bound += w[i];
        }
        cache.update("L", w, {Rational(1, 2) + bound / 2}, {{p, std::nullopt}});
    }
}

void BM_CacheQuery(benchmark::State& state) {
    const uint32_t dim = static_cast<uint32_t>(state.range(0));
    ParetoCache cache;
    seed_cache(cache, dim, 24);
    std::mt19937_64 rng(7);
    const Rational eta(1, 100000);
    for (auto _ : state) {
        auto read = cache.query("L", random_weight(rng, dim), eta);
        benchmark::DoNotOptimize(read.lower.data());
    }
}
BENCHMARK(BM_CacheQuery)->Arg(2)->Arg(3)->Arg(4);

void BM_CacheUpdate(benchmark::State& state) {
    const uint32_t dim = 2;
    std::mt19937_64 rng(9);
    for (auto _ : state) {
        state.PauseTiming();
        ParetoCache cache;
        cache.register_leaf("L", 1, dim);
        state.ResumeTiming();
        for (int k = 0; k < 16; ++k) {
            std::vector<Rational> w = random_weight(rng, dim);
            std::vector<Rational> p{Rational(1, 8), Rational(1, 8)};
            Rational bound = w[0] + w[1];
            cache.update("L", w, {bound}, {{p, std::nullopt}});
        }
    }
}
BENCHMARK(BM_CacheUpdate);

void BM_ExactLp(benchmark::State& state) {
    const uint32_t dim = static_cast<uint32_t>(state.range(0));
    std::mt19937_64 rng(11);
    std::vector<Halfspace> rows;
    for (int k = 0; k < 24; ++k) {
        Halfspace h;
        h.normal = random_weight(rng, dim);
        h.bound = Rational(1 + static_cast<int>(rng() % 8), 8);
        rows.push_back(std::move(h));
    }
    for (auto _ : state) {
        Rational v = maximize_over_halfspaces(random_weight(rng, dim), rows, dim);
        benchmark::DoNotOptimize(&v);
    }
}
BENCHMARK(BM_ExactLp)->Arg(2)->Arg(4)->Arg(6);

}  // namespace
