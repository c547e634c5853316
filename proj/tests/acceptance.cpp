// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerance in code.

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <random>
#include <vector>

#include "compmdp/benchgen.hpp"
#include "compmdp/engine.hpp"
#include "compmdp/exact.hpp"
#include "compmdp/pareto.hpp"
#include "compmdp/solve.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace compmdp;

namespace {

int failures = 0;
int checks = 0;

void require(bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
        ++failures;
        std::cerr << "    [check failed] " << what << "\n";
    }
}

struct Criterion {
    const char* name;
    bool passed;
    double seconds;
};
std::vector<Criterion> results;

template <typename F>
void run_criterion(const char* name, F&& body) {
    int before = failures;
    auto start = std::chrono::steady_clock::now();
    body();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool ok = failures == before;
    results.push_back({name, ok, secs});
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "  (" << std::fixed
              << std::setprecision(2) << secs << "s)\n";
}

CviConfig engine_config(GscKind gsc, CacheKind cache) {
    CviConfig cfg;
    cfg.gsc = gsc;
    cfg.cache = cache;
    cfg.iteration_cap = 4000;
    return cfg;
}

struct AlgorithmRun {
    const char* name;
    bool mono;
    GscKind gsc;
    CacheKind cache;
};
constexpr AlgorithmRun kAlgorithms[] = {
    {"mono", true, GscKind::None, CacheKind::None},
    {"cvi", false, GscKind::Optimistic, CacheKind::None},
    {"ocvi-exact", false, GscKind::Optimistic, CacheKind::Exact},
    {"ocvi-pareto", false, GscKind::Optimistic, CacheKind::Pareto},
    {"symb", false, GscKind::BottomUp, CacheKind::Pareto},
};

CviResult run_algorithm(const AlgorithmRun& alg, const StringDiagram& d,
                        const std::vector<Rational>& w) {
    CviConfig cfg = engine_config(alg.gsc, alg.cache);
    return alg.mono ? mono_run(d, w, cfg) : cvi_run(d, w, cfg);
}

std::vector<Rational> exact_global_values(const StringDiagram& d, const ComponentIndex& index,
                                          const std::vector<Rational>& w) {
    OpenMdp flat = flatten(d);
    ExactSolution pi = policy_iteration_exact(flat.exact_mdp(), {flat.exits(), w});
    std::vector<Rational> out;
    for (uint32_t e : index.global_entrances)
        out.push_back(pi.values[*flat.exact_mdp().find_state(index.entrances[e].name)]);
    return out;
}

const Rational kEps(1, 10000);       // 1e-4
const Rational kTol9(1, 1000000000); // 1e-9

// ---------------------------------------------------------------- 1
void criterion_golden_instance() {
    auto start = std::chrono::steady_clock::now();

    // independent oracle: enumerate both schedulers of the flattened loop,
    // solving each chain with the test-local dense elimination
    StringDiagram d = fixtures::loop_pair_diagram();
    OpenMdp flat = flatten(d);
    TargetWeight<Rational> tw{flat.exits(), {Rational(1), Rational(0)}};
    StateId entrance = flat.entrances()[0];
    Rational oracle;
    for (const auto& sched : oracles::enumerate_dm(flat.exact_mdp())) {
        Rational v = oracles::chain_values(flat.exact_mdp(), sched, tw)[entrance];
        if (v > oracle) oracle = v;
    }
    require(oracle == Rational(35, 79), "oracle value is 35/79");

    std::vector<Rational> w{Rational(1), Rational(0)};
    for (const auto& alg : kAlgorithms) {
        CviResult r = run_algorithm(alg, d, w);
        require(r.converged, std::string(alg.name) + " converges");
        Rational lower = exact(r.entrances[0].lower);
        require(lower <= Rational(35, 79), std::string(alg.name) + " lower <= 35/79");
        require(Rational(35, 79) - lower <= kEps,
                std::string(alg.name) + " lower within 1e-4 of 35/79");
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(secs < 1.0, "runtime below one second");
}

// ---------------------------------------------------------------- 2 & 7
struct SweepOutcome {
    int converged_runs = 0;
    int gsc_accepts = 0;
    int band_violations = 0;
    int soundness_violations = 0;
};
SweepOutcome sweep;

void criterion_soundness_sweep() {
    std::mt19937_64 rng(20240811);
    for (int instance = 0; instance < 200; ++instance) {
        fixtures::RandomDiagramOptions opt;  // <=4 components, <=2 exits each, loops
        StringDiagram d = fixtures::random_diagram(rng, opt);
        ComponentIndex index = index_diagram(d);
        std::vector<Rational> w = fixtures::random_weights(rng, index.global_exits.size());
        std::vector<Rational> star = exact_global_values(d, index, w);

        for (const auto& alg : kAlgorithms) {
            CviResult r = run_algorithm(alg, d, w);
            for (uint32_t pos = 0; pos < star.size(); ++pos) {
                Rational lower = exact(r.entrances[pos].lower);
                if (lower > star[pos]) ++sweep.soundness_violations;
                if (r.converged && star[pos] - lower > kEps) ++sweep.band_violations;
            }
            if (r.converged) {
                ++sweep.converged_runs;
                if (!alg.mono && r.gsc_accept_iteration >= 0) ++sweep.gsc_accepts;
            }
        }
    }
    require(sweep.soundness_violations == 0, "no lower bound ever exceeds the exact value");
    require(sweep.band_violations == 0, "every converged run is within 1e-4");
    require(sweep.converged_runs >= 800, "the sweep converges almost everywhere");
}

// ---------------------------------------------------------------- 3
void criterion_decomposition_equality() {
    std::mt19937_64 rng(777);
    for (int instance = 0; instance < 100; ++instance) {
        // one choice state per component keeps scheduler counts tiny
        fixtures::RandomComponentOptions ao;
        ao.right_entrances = 1;
        ao.right_exits = 2;
        ao.interior = 1;
        ao.max_actions = 3;
        ao.prefix = "a_";
        fixtures::RandomComponentOptions bo;
        bo.right_entrances = 2;
        bo.right_exits = 1;
        bo.interior = 1;
        bo.max_actions = 3;
        bo.prefix = "b_";
        OpenMdp a = fixtures::random_component(rng, ao);
        OpenMdp b = fixtures::random_component(rng, bo);

        OpenMdp ab = seq_compose(a, b);
        ExactSolution flat = policy_iteration_exact(ab.exact_mdp(), {ab.exits(), {Rational(1)}});
        Rational direct = flat.values[ab.io().right_entrances[0]];

        Rational bilinear;
        auto a_exits = a.exits();
        StateId a_in = a.io().right_entrances[0];
        for (const auto& sa : oracles::enumerate_dm(a.exact_mdp())) {
            auto pa = oracles::reach_rows(a.exact_mdp(), sa, a_exits);
            for (const auto& sb : oracles::enumerate_dm(b.exact_mdp())) {
                auto pb = oracles::reach_rows(b.exact_mdp(), sb, b.exits());
                Rational acc;
                for (size_t o = 0; o < a_exits.size(); ++o)
                    acc += pa[a_in][o] * pb[b.entrances()[o]][0];
                if (acc > bilinear) bilinear = acc;
            }
        }
        Rational diff = direct > bilinear ? Rational(direct - bilinear)
                                          : Rational(bilinear - direct);
        if (diff > kTol9) require(false, "bilinear optimum matches the flattened value");
    }
    require(true, "decomposition sweep ran");
}

// ---------------------------------------------------------------- 4
void criterion_shortcut_equality() {
    std::mt19937_64 rng(4242);
    for (int instance = 0; instance < 50; ++instance) {
        fixtures::RandomDiagramOptions opt;
        opt.max_components = 3;
        opt.max_interior = 3;  // <= 3 non-open states
        opt.max_actions = 2;
        StringDiagram d = fixtures::random_diagram(rng, opt);
        ComponentIndex index = index_diagram(d);
        std::vector<Rational> w = fixtures::random_weights(rng, index.global_exits.size());

        // explicit summary: one leaf per occurrence whose actions are the
        // component's schedulers with their exact reachability rows
        LeafTable summary_leaves;
        auto rebuild = [&](auto&& self, const DiagramNode& node,
                           uint32_t base) -> std::pair<NodePtr, uint32_t> {
            if (node.kind == DiagramNode::Kind::Leaf) {
                const Component& comp = index.components[base];
                const OpenMdp& leaf = d.leaf(comp.leaf);
                Mdp<Rational> m;
                OpenEnds io;
                std::vector<StateId> ends;
                for (StateId s : leaf.io().right_entrances)
                    io.right_entrances.push_back(m.add_state(leaf.exact_mdp().state(s).name));
                for (StateId s : leaf.io().left_entrances)
                    io.left_entrances.push_back(m.add_state(leaf.exact_mdp().state(s).name));
                for (StateId s : leaf.io().right_exits)
                    io.right_exits.push_back(m.add_state(leaf.exact_mdp().state(s).name));
                for (StateId s : leaf.io().left_exits)
                    io.left_exits.push_back(m.add_state(leaf.exact_mdp().state(s).name));
                StateId star = m.add_state("star");
                auto entrances = leaf.entrances();
                auto exits = leaf.exits();
                uint32_t n_entr = static_cast<uint32_t>(entrances.size());
                std::vector<StateId> summary_exits;
                for (uint32_t k = 0; k < exits.size(); ++k)
                    summary_exits.push_back(n_entr + k);
                int sched_id = 0;
                for (const auto& sched : oracles::enumerate_dm(leaf.exact_mdp())) {
                    auto rows = oracles::reach_rows(leaf.exact_mdp(), sched, exits);
                    for (uint32_t i = 0; i < n_entr; ++i) {
                        auto& action =
                            m.add_action(i, "s" + std::to_string(sched_id));
                        Rational residual(1);
                        for (uint32_t o = 0; o < exits.size(); ++o) {
                            const Rational& p = rows[entrances[i]][o];
                            if (p == 0) continue;
                            action.branches.push_back({summary_exits[o], p});
                            residual -= p;
                        }
                        if (residual > 0) action.branches.push_back({star, residual});
                    }
                    ++sched_id;
                }
                std::string name = comp.occurrence + "#summary";
                summary_leaves.emplace(name, OpenMdp(std::move(m), std::move(io)));
                return {make_leaf(name), base + 1};
            }
            auto [left, mid] = self(self, *node.left, base);
            auto [right, end] = self(self, *node.right, mid);
            return {node.kind == DiagramNode::Kind::Seq ? make_seq(left, right)
                                                        : make_sum(left, right),
                    end};
        };
        auto [root, total] = rebuild(rebuild, d.root(), 0);
        require(total == index.components.size(), "summary rebuild covered every occurrence");
        StringDiagram summary(root, std::move(summary_leaves));

        OpenMdp flat_summary = flatten(summary);
        ExactSolution via_summary =
            policy_iteration_exact(flat_summary.exact_mdp(), {flat_summary.exits(), w});
        std::vector<Rational> star_direct = exact_global_values(d, index, w);
        auto summary_entrances = flat_summary.entrances();
        for (uint32_t pos = 0; pos < star_direct.size(); ++pos) {
            Rational diff = via_summary.values[summary_entrances[pos]] - star_direct[pos];
            if (diff < 0) diff = -diff;
            if (diff > Rational(1, 1000000000000))
                require(false, "summary value equals the flattened value (1e-12)");
        }
    }
    require(true, "summary equality sweep ran");
}

// ---------------------------------------------------------------- 5
void criterion_cache_sandwich() {
    std::mt19937_64 rng(5150);
    const Rational eta(1, 100000);
    for (int leaf_trial = 0; leaf_trial < 20; ++leaf_trial) {
        fixtures::RandomComponentOptions opt;
        opt.right_exits = 2;
        opt.interior = 1 + static_cast<uint32_t>(rng() % 3);
        OpenMdp leaf = fixtures::random_component(rng, opt);
        ParetoCache cache;
        cache.register_leaf("L", 1, 2);

        std::vector<std::vector<Rational>> probes;
        for (int k = 0; k < 3; ++k) probes.push_back(fixtures::random_weights(rng, 2));
        std::vector<Rational> last_under(probes.size(), Rational(-1));
        std::vector<Rational> last_over(probes.size(), Rational(9));

        for (int step = 0; step < 30; ++step) {
            std::vector<Rational> w = fixtures::random_weights(rng, 2);
            if (rng() % 2 == 0) {
                cache.query("L", w, eta);
            } else {
                // engine-style update: float OVI lower, exact upper + point
                TargetWeight<double> twf{leaf.exits(), down(w)};
                OviResult ovi = ovi_solve(leaf.approx_mdp(), twf, to_double_down(eta));
                TargetWeight<Rational> twq{leaf.exits(), w};
                ExactSolution pi = policy_iteration_exact(leaf.exact_mdp(), twq);
                auto rows = mc_reachability(leaf.exact_mdp(), pi.sched, leaf.exits());
                StateId entrance = leaf.entrances()[0];
                cache.update("L", w, {pi.values[entrance]},
                             {{rows[entrance], pi.sched}});
                if (ovi.converged) {
                    // replaying an eta-converged weight must now hit
                    auto replay = cache.query("L", w, eta);
                    require(replay.hit, "replay after update hits");
                }
            }
            const auto& approx = cache.approx("L", 0);
            for (size_t q = 0; q < probes.size(); ++q) {
                Rational lo = approx.under.read(probes[q]);
                Rational hi = approx.over.read(probes[q]);
                Rational star = oracles::component_optimum(leaf, probes[q])[0];
                require(lo <= star + kTol9, "under read below the exact value");
                require(star <= hi + kTol9, "over read above the exact value");
                require(lo >= last_under[q], "under reads never decrease");
                require(hi <= last_over[q], "over reads never increase");
                last_under[q] = lo;
                last_over[q] = hi;
            }
        }
    }
}

// ---------------------------------------------------------------- 6
void criterion_two_point_geometry() {
    OpenMdp leaf = fixtures::two_point_leaf();
    // the two schedulers realize exactly these trade-offs
    auto schedulers = oracles::enumerate_dm(leaf.exact_mdp());
    require(schedulers.size() == 2, "exactly two deterministic schedulers");
    std::set<std::pair<std::string, std::string>> points;
    for (const auto& sched : schedulers) {
        auto rows = oracles::reach_rows(leaf.exact_mdp(), sched, leaf.exits());
        points.emplace(to_fraction_string(rows[leaf.entrances()[0]][0]),
                       to_fraction_string(rows[leaf.entrances()[0]][1]));
    }
    require(points.count({"1/5", "7/10"}) == 1, "realizes (0.2, 0.7)");
    require(points.count({"3/5", "1/5"}) == 1, "realizes (0.6, 0.2)");

    ParetoCache cache;
    cache.register_leaf("P", 1, 2);
    for (auto w : {std::vector<Rational>{Rational(1), Rational(0)},
                   std::vector<Rational>{Rational(0), Rational(1)}}) {
        TargetWeight<Rational> twq{leaf.exits(), w};
        ExactSolution pi = policy_iteration_exact(leaf.exact_mdp(), twq);
        auto rows = mc_reachability(leaf.exact_mdp(), pi.sched, leaf.exits());
        StateId entrance = leaf.entrances()[0];
        cache.update("P", w, {pi.values[entrance]}, {{rows[entrance], pi.sched}});
    }
    const auto& approx = cache.approx("P", 0);
    std::vector<Rational> diag{Rational(1, 2), Rational(1, 2)};
    Rational under = approx.under.read(diag);
    Rational over = approx.over.read(diag);
    Rational diff = under - Rational(45, 100);
    if (diff < 0) diff = -diff;
    require(diff <= kTol9, "under read of the diagonal is 0.45");
    require(over >= Rational(45, 100), "over read of the diagonal is at least 0.45");
}

// ---------------------------------------------------------------- 7
void criterion_gsc_soundness() {
    // data collected during the soundness sweep
    require(sweep.gsc_accepts > 0, "the sweep exercised the stopping criteria");
    require(sweep.band_violations == 0, "no accepted run missed the 1e-4 band");
}

// ---------------------------------------------------------------- 8
void criterion_benchmark_shapes() {
    for (uint32_t n : {1u, 2u, 3u}) {
        ComponentIndex rooms =
            index_diagram(gen_diagram(parse_bench_spec("rooms:" + std::to_string(n) + ":rms")).build());
        require(rooms.components.size() == n * n, "rooms has n^2 occurrences");
        require(rooms.leaf_names.size() == 1, "rooms shares one nominal leaf");
        ComponentIndex chains = index_diagram(
            gen_diagram(parse_bench_spec("chains:" + std::to_string(n) + ":dice2")).build());
        require(chains.components.size() == n, "chains has n occurrences");
        ComponentIndex loop = index_diagram(
            gen_diagram(parse_bench_spec("chainsloop:" + std::to_string(n) + ":dice2")).build());
        require(loop.components.size() == n, "chainsloop has n occurrences");
    }

    // the loop family flattens to a cyclic wiring graph
    ComponentIndex loop10 =
        index_diagram(gen_diagram(parse_bench_spec("chainsloop:10:dice2")).build());
    std::vector<std::set<uint32_t>> succ(loop10.components.size());
    for (uint32_t x = 0; x < loop10.exits.size(); ++x)
        if (loop10.wiring[x] >= 0)
            succ[loop10.exits[x].component].insert(
                loop10.entrances[static_cast<uint32_t>(loop10.wiring[x])].component);
    std::vector<int8_t> mark(loop10.components.size(), 0);
    bool cycle = false;
    auto dfs = [&](auto&& self, uint32_t c) -> void {
        mark[c] = 1;
        for (uint32_t nxt : succ[c]) {
            if (mark[nxt] == 1) cycle = true;
            else if (mark[nxt] == 0) self(self, nxt);
        }
        mark[c] = 2;
    };
    for (uint32_t c = 0; c < loop10.components.size(); ++c)
        if (mark[c] == 0) dfs(dfs, c);
    require(cycle, "chainsloop wiring contains a cycle");

    for (const char* spec : {"rooms:3:rms", "chainsloop:10:dice2"}) {
        ModelDocument doc = gen_diagram(parse_bench_spec(spec));
        StringDiagram d = doc.build();
        ComponentIndex index = index_diagram(d);
        ResolvedQuery q = resolve_query(doc.query, index);
        std::vector<Rational> star = exact_global_values(d, index, q.weights);
        for (const auto& alg : kAlgorithms) {
            auto start = std::chrono::steady_clock::now();
            CviResult r = run_algorithm(alg, d, q.weights);
            double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            require(secs < 60.0, std::string(spec) + " " + alg.name + " finishes within 60s");
            for (uint32_t pos = 0; pos < star.size(); ++pos) {
                Rational lower = exact(r.entrances[pos].lower);
                require(lower <= star[pos],
                        std::string(spec) + " " + alg.name + " lower is sound");
                if (r.converged)
                    require(star[pos] - lower <= kEps,
                            std::string(spec) + " " + alg.name + " lower within 1e-4");
            }
        }
    }
}

// ---------------------------------------------------------------- 9
void criterion_convergence_without_gsc() {
    std::mt19937_64 rng(20240811);  // the criterion-2 corpus
    const Rational gap_bound(1, 1000000);
    for (int instance = 0; instance < 200; ++instance) {
        fixtures::RandomDiagramOptions opt;
        StringDiagram d = fixtures::random_diagram(rng, opt);
        ComponentIndex index = index_diagram(d);
        std::vector<Rational> w = fixtures::random_weights(rng, index.global_exits.size());

        CviConfig cfg = engine_config(GscKind::None, CacheKind::None);
        CviResult r = cvi_run(d, w, cfg);
        std::vector<Rational> star = exact_global_values(d, index, w);
        for (uint32_t pos = 0; pos < star.size(); ++pos) {
            Rational lower = exact(r.entrances[pos].lower);
            require(lower <= star[pos], "criterion-less lower is sound");
            require(star[pos] - lower < gap_bound, "gap below 1e-6 within the cap");
        }
    }
}

}  // namespace

int main() {
    std::cout << "acceptance suite\n";

    run_criterion("1. golden loop instance solves to 35/79 under every algorithm",
                  criterion_golden_instance);
    {
        auto start = std::chrono::steady_clock::now();
        run_criterion("2. soundness sweep over 200 random diagrams x 5 algorithms",
                      criterion_soundness_sweep);
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs >= 120.0) {
            std::cout << "[FAIL] 2b. sweep runtime below 120s (" << secs << "s)\n";
            ++failures;
        } else {
            std::cout << "[PASS] 2b. sweep runtime below 120s\n";
        }
    }
    run_criterion("3. decomposition equality on 100 unidirectional pipelines",
                  criterion_decomposition_equality);
    run_criterion("4. summary-level values equal flattened values on 50 tiny diagrams",
                  criterion_shortcut_equality);
    run_criterion("5. cache sandwich and monotone refinement", criterion_cache_sandwich);
    run_criterion("6. two-point geometry reads 0.45 on the diagonal",
                  criterion_two_point_geometry);
    run_criterion("7. accepted stopping criteria never miss the band", criterion_gsc_soundness);
    run_criterion("8. benchmark shapes and desk presets", criterion_benchmark_shapes);
    run_criterion("9. criterion-free runs close the gap below 1e-6",
                  criterion_convergence_without_gsc);

    std::cout << "\n" << checks << " checks, " << failures << " failures\n";
    return failures == 0 ? 0 : 1;
}
