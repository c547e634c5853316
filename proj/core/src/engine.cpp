#include "compmdp/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <future>
#include <map>

#include <nlohmann/json.hpp>

#include "compmdp/errors.hpp"
#include "compmdp/exact.hpp"
#include "compmdp/solve.hpp"

namespace compmdp {

void CviConfig::validate() const {
    if (!(epsilon > 0 && epsilon <= 1)) throw InputError("epsilon must be in (0,1]");
    if (!(eta > 0 && eta <= epsilon)) throw InputError("eta must satisfy 0 < eta <= epsilon");
    if (check_period < 1) throw InputError("check_period must be at least 1");
    if (iteration_cap < 1) throw InputError("iteration_cap must be at least 1");
    if (gsc == GscKind::BottomUp && cache != CacheKind::Pareto)
        throw InputError("the bottom-up stopping criterion needs the Pareto cache");
}

std::vector<double> propagate(const ComponentIndex& index, const std::vector<double>& g,
                              const std::vector<double>& w_global) {
    if (g.size() != index.entrances.size()) throw ModelError("propagate: g arity mismatch");
    if (w_global.size() != index.global_exits.size())
        throw ModelError("propagate: weight arity mismatch");
    std::vector<double> h(index.exits.size(), 0.0);
    for (uint32_t pos = 0; pos < index.global_exits.size(); ++pos)
        h[index.global_exits[pos]] = w_global[pos];
    for (uint32_t x = 0; x < index.exits.size(); ++x)
        if (index.wiring[x] >= 0) h[x] = g[static_cast<uint32_t>(index.wiring[x])];
    return h;
}

namespace {

struct ComponentRefs {
    const OpenMdp* leaf = nullptr;
    std::vector<StateId> entrance_states;  // right then left
    std::vector<StateId> exit_states;
};

struct EngineContext {
    const StringDiagram& d;
    ComponentIndex index;
    std::vector<Rational> w;
    std::vector<double> w_down;
    std::vector<ComponentRefs> refs;
    // Exact component optima per (leaf, exact weight key); shared by the
    // summary Bellman operator across stopping-criterion checks.
    std::map<std::string, std::vector<Rational>> exact_memo;
};

EngineContext make_context(const StringDiagram& d, const std::vector<Rational>& w,
                           const ComponentIndex* prebuilt = nullptr) {
    EngineContext ctx{d, prebuilt ? *prebuilt : index_diagram(d), w, {}, {}, {}};
    if (w.size() != ctx.index.global_exits.size())
        throw InputError("weight vector arity does not match the global exits");
    for (const auto& q : w)
        if (q < 0 || q > 1) throw InputError("weights must lie in [0,1]");
    ctx.w_down.reserve(w.size());
    for (const auto& q : w) ctx.w_down.push_back(to_double_down(q));
    ctx.refs.reserve(ctx.index.components.size());
    for (const auto& comp : ctx.index.components) {
        const OpenMdp& leaf = d.leaf(comp.leaf);
        ctx.refs.push_back(ComponentRefs{&leaf, leaf.entrances(), leaf.exits()});
    }
    return ctx;
}

std::string weight_key(const std::string& leaf, const std::vector<Rational>& w) {
    std::string key = leaf;
    for (const auto& q : w) {
        key += '|';
        key += to_fraction_string(q);
    }
    return key;
}

std::string weight_key_bits(const std::string& leaf, const std::vector<double>& w) {
    std::string key = leaf;
    key += '#';
    size_t offset = key.size();
    key.resize(offset + w.size() * sizeof(double));
    std::memcpy(key.data() + offset, w.data(), w.size() * sizeof(double));
    return key;
}

std::vector<Rational> component_exit_weights(const EngineContext& ctx, uint32_t c,
                                             const std::vector<Rational>& candidate) {
    const Component& comp = ctx.index.components[c];
    std::vector<Rational> weights(comp.n_exits);
    std::vector<Rational> global_w(ctx.index.exits.size());
    for (uint32_t pos = 0; pos < ctx.index.global_exits.size(); ++pos)
        global_w[ctx.index.global_exits[pos]] = ctx.w[pos];
    for (uint32_t slot = 0; slot < comp.n_exits; ++slot) {
        uint32_t x = ctx.index.exit_id(c, slot);
        weights[slot] = ctx.index.wiring[x] >= 0
                            ? candidate[static_cast<uint32_t>(ctx.index.wiring[x])]
                            : global_w[x];
    }
    return weights;
}

const std::vector<Rational>& exact_component_optimum(EngineContext& ctx, uint32_t c,
                                                     const std::vector<Rational>& exit_weights) {
    const Component& comp = ctx.index.components[c];
    std::string key = weight_key(comp.leaf, exit_weights);
    auto it = ctx.exact_memo.find(key);
    if (it != ctx.exact_memo.end()) return it->second;

    const ComponentRefs& refs = ctx.refs[c];
    TargetWeight<Rational> tw{refs.exit_states, exit_weights};
    ExactSolution solution = policy_iteration_exact(refs.leaf->exact_mdp(), tw);
    std::vector<Rational> at_entrances;
    at_entrances.reserve(refs.entrance_states.size());
    for (StateId s : refs.entrance_states) at_entrances.push_back(solution.values[s]);
    return ctx.exact_memo.emplace(std::move(key), std::move(at_entrances)).first->second;
}

}  // namespace

std::vector<Rational> shortcut_bellman_apply(const StringDiagram& d, const ComponentIndex& index,
                                             const std::vector<Rational>& candidate,
                                             const std::vector<Rational>& w) {
    EngineContext ctx = make_context(d, w, &index);
    if (candidate.size() != index.entrances.size())
        throw ModelError("shortcut Bellman: candidate arity mismatch");
    std::vector<Rational> out(index.entrances.size());
    for (uint32_t c = 0; c < index.components.size(); ++c) {
        std::vector<Rational> exit_weights = component_exit_weights(ctx, c, candidate);
        const std::vector<Rational>& values = exact_component_optimum(ctx, c, exit_weights);
        for (uint32_t slot = 0; slot < index.components[c].n_entrances; ++slot)
            out[index.entrance_id(c, slot)] = values[slot];
    }
    return out;
}

namespace {

// Float-mode Park slack. g comes from binary64 iteration whose sound
// rounding guards leave a nonuniform residue of a few ulps below the exact
// fixed point; on fully wired cycles that residue makes a zero-tolerance
// check unsatisfiable, so the candidate absorbs it instead: certifying
// u + slack keeps u + slack - g <= epsilon + slack, with slack well below
// every tolerance in play.
const Rational kShortcutParkSlack = Rational(1, 1000000000000);  // 1e-12

std::optional<std::vector<Rational>> opt_gsc_accepts(EngineContext& ctx,
                                                     const std::vector<double>& g,
                                                     double epsilon) {
    std::vector<Rational> candidate(ctx.index.entrances.size());
    const Rational eps = exact(epsilon);
    for (uint32_t i = 0; i < candidate.size(); ++i)
        candidate[i] = std::min(Rational(1), exact(g[i]) + eps);
    for (uint32_t c = 0; c < ctx.index.components.size(); ++c) {
        std::vector<Rational> exit_weights = component_exit_weights(ctx, c, candidate);
        const std::vector<Rational>& values = exact_component_optimum(ctx, c, exit_weights);
        for (uint32_t slot = 0; slot < ctx.index.components[c].n_entrances; ++slot)
            if (values[slot] > candidate[ctx.index.entrance_id(c, slot)] + kShortcutParkSlack)
                return std::nullopt;
    }
    for (auto& u : candidate) u = std::min(Rational(1), Rational(u + kShortcutParkSlack));
    return candidate;
}

}  // namespace

std::optional<std::vector<Rational>> opt_gsc_check(const StringDiagram& d,
                                                   const ComponentIndex& index,
                                                   const std::vector<double>& g,
                                                   const std::vector<Rational>& w, double epsilon) {
    EngineContext ctx = make_context(d, w, &index);
    return opt_gsc_accepts(ctx, g, epsilon);
}

BuGscOutcome bu_gsc_check(const StringDiagram& d, const ComponentIndex& index,
                          const ParetoCache& cache, const std::vector<Rational>& w,
                          const std::vector<double>& g, double epsilon) {
    ComposeOverResult co = compose_over(d, index, cache, w);
    if (co.status == ComposeOverResult::Status::Unsupported)
        return {BuGscOutcome::Status::Unsupported, {}};
    BuGscOutcome outcome;
    outcome.upper = std::move(co.upper);
    const Rational eps = exact(epsilon);
    outcome.status = BuGscOutcome::Status::Accept;
    for (uint32_t pos = 0; pos < index.global_entrances.size(); ++pos) {
        Rational lower = exact(g[index.global_entrances[pos]]);
        if (outcome.upper[pos] - lower > eps) {
            outcome.status = BuGscOutcome::Status::NotYet;
            break;
        }
    }
    return outcome;
}

namespace {

struct LocalSolveOutput {
    std::vector<double> values;  // per entrance slot
    bool state_changed = false;
};

/// Per-occurrence continued value iteration; the persistent state vector
/// keeps improving across engine iterations, which restores convergence
/// whenever caches are out of the picture.
LocalSolveOutput continued_vi(const ComponentRefs& refs, std::vector<double>& vi_state,
                              const std::vector<double>& exit_weights, double settle) {
    const Mdp<double>& mdp = refs.leaf->approx_mdp();
    if (vi_state.empty()) vi_state.assign(mdp.state_count(), 0.0);
    TargetWeight<double> tw{refs.exit_states, exit_weights};

    LocalSolveOutput out;
    constexpr int kMaxSweeps = 64;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        std::vector<double> next = bellman_apply(mdp, tw, vi_state);
        double delta = 0;
        for (size_t s = 0; s < next.size(); ++s) delta = std::max(delta, next[s] - vi_state[s]);
        if (delta > 0) out.state_changed = true;
        vi_state = std::move(next);
        if (delta <= settle) break;
    }
    out.values.reserve(refs.entrance_states.size());
    for (StateId s : refs.entrance_states) out.values.push_back(vi_state[s]);
    return out;
}

struct GroupSolveResult {
    std::vector<double> values;  // per entrance slot
    bool solver_ran = false;
    // pending cache payload (Pareto mode)
    bool has_update = false;
    std::vector<Rational> wq;
    std::vector<Rational> upper;
    std::vector<AchievablePoint> points;
    std::vector<AchievablePoint> extra_points;  // second scheduler, may be empty
};

/// Fresh local OVI for one (leaf, weight) group plus the exact artifacts a
/// Pareto update needs: the scheduler's realized points and a precise
/// upper bound per entrance (exact policy iteration, so the recorded
/// halfspace is sound for the exact model).
GroupSolveResult solve_group(const ComponentRefs& refs, const std::vector<double>& exit_weights,
                             double eta, bool want_update) {
    GroupSolveResult result;
    result.solver_ran = true;
    const Mdp<double>& mdp = refs.leaf->approx_mdp();
    TargetWeight<double> tw{refs.exit_states, exit_weights};
    OviResult ovi = ovi_solve(mdp, tw, eta);
    result.values.reserve(refs.entrance_states.size());
    for (StateId s : refs.entrance_states) result.values.push_back(ovi.lower[s]);

    if (!want_update) return result;
    result.has_update = true;
    result.wq = exact(exit_weights);
    TargetWeight<Rational> twq{refs.exit_states, result.wq};
    ExactSolution precise = policy_iteration_exact(refs.leaf->exact_mdp(), twq);
    // The precise policy realizes the recorded upper bound exactly, so a
    // repeat query of this weight reads a zero cache gap.
    auto reach = mc_reachability(refs.leaf->exact_mdp(), precise.sched, refs.exit_states);
    for (size_t slot = 0; slot < refs.entrance_states.size(); ++slot) {
        result.upper.push_back(precise.values[refs.entrance_states[slot]]);
        result.points.push_back(AchievablePoint{reach[refs.entrance_states[slot]], precise.sched});
    }
    // The value-iteration scheduler may realize a different trade-off;
    // record its points too when it differs.
    DmScheduler vi_sched = ovi.sched;
    for (StateId s = 0; s < mdp.state_count(); ++s)
        if (vi_sched[s] < 0 && !mdp.is_sink(s)) vi_sched[s] = 0;
    if (vi_sched != precise.sched) {
        auto vi_reach = mc_reachability(refs.leaf->exact_mdp(), vi_sched, refs.exit_states);
        result.extra_points.reserve(refs.entrance_states.size());
        for (size_t slot = 0; slot < refs.entrance_states.size(); ++slot)
            result.extra_points.push_back(
                AchievablePoint{vi_reach[refs.entrance_states[slot]], vi_sched});
    }
    return result;
}

struct Clock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

}  // namespace

CviResult cvi_run(const StringDiagram& d, const std::vector<Rational>& w, const CviConfig& cfg) {
    cfg.validate();
    Clock clock;
    EngineContext ctx = make_context(d, w);
    const ComponentIndex& index = ctx.index;

    ParetoCache local_cache;
    ParetoCache* cache = cfg.warm_cache ? cfg.warm_cache : &local_cache;
    if (cfg.cache == CacheKind::Pareto)
        for (const auto& name : index.leaf_names) {
            const OpenMdp& leaf = d.leaf(name);
            cache->register_leaf(name, static_cast<uint32_t>(leaf.entrances().size()),
                                 static_cast<uint32_t>(leaf.exits().size()));
        }

    std::vector<double> g(index.entrances.size(), 0.0);
    std::vector<double> h = propagate(index, g, ctx.w_down);
    std::vector<std::vector<double>> vi_state(index.components.size());
    std::map<std::string, std::vector<double>> exact_cache;
    CacheStats exact_stats;

    CviResult result;
    const Rational eta_q = exact(cfg.eta);
    uint64_t it = 0;
    int64_t last_checked = -1;
    std::string note;

    GscKind gsc_mode = cfg.gsc;

    auto try_gsc = [&]() -> bool {
        if (gsc_mode == GscKind::None) return false;
        Clock gsc_clock;
        bool accepted = false;
        if (gsc_mode == GscKind::BottomUp) {
            BuGscOutcome outcome = bu_gsc_check(d, index, *cache, w, g, cfg.epsilon);
            if (outcome.status == BuGscOutcome::Status::Unsupported) {
                note = "bottom-up criterion unsupported (a component has more than 3 exits); "
                       "falling back to the optimistic criterion";
                gsc_mode = GscKind::Optimistic;
            } else if (outcome.status == BuGscOutcome::Status::Accept) {
                for (uint32_t pos = 0; pos < index.global_entrances.size(); ++pos) {
                    uint32_t e = index.global_entrances[pos];
                    result.entrances[pos].upper = to_double_up(outcome.upper[pos]);
                    result.entrances[pos].lower = g[e];
                }
                accepted = true;
            }
        }
        if (!accepted && gsc_mode == GscKind::Optimistic) {
            if (auto u = opt_gsc_accepts(ctx, g, cfg.epsilon)) {
                for (uint32_t pos = 0; pos < index.global_entrances.size(); ++pos) {
                    uint32_t e = index.global_entrances[pos];
                    result.entrances[pos].upper = to_double_up((*u)[e]);
                    result.entrances[pos].lower = g[e];
                }
                accepted = true;
            }
        }
        result.gsc_seconds += gsc_clock.seconds();
        return accepted;
    };

    result.entrances.resize(index.global_entrances.size());
    for (uint32_t pos = 0; pos < index.global_entrances.size(); ++pos)
        result.entrances[pos].name = index.entrances[index.global_entrances[pos]].name;

    auto out_of_budget = [&]() {
        return it >= cfg.iteration_cap ||
               (cfg.time_cap_seconds > 0 && clock.seconds() > cfg.time_cap_seconds);
    };

    bool converged = false;
    while (true) {
        if (it > 0 && it % cfg.check_period == 0 && static_cast<int64_t>(it) != last_checked) {
            last_checked = static_cast<int64_t>(it);
            if (try_gsc()) {
                converged = true;
                result.gsc_accept_iteration = static_cast<int64_t>(it);
                break;
            }
        }
        if (out_of_budget()) {
            if (static_cast<int64_t>(it) != last_checked && try_gsc()) {
                converged = true;
                result.gsc_accept_iteration = static_cast<int64_t>(it);
            }
            break;
        }

        // One Jacobi iteration: all local solves read the same h.
        const bool cache_active = cfg.cache != CacheKind::None && it < cfg.cache_cutoff;
        bool g_changed = false, state_changed = false;

        if (!cache_active) {
            for (uint32_t c : index.topo_order) {
                const Component& comp = index.components[c];
                std::vector<double> exit_weights(comp.n_exits);
                bool all_zero = true;
                for (uint32_t slot = 0; slot < comp.n_exits; ++slot) {
                    exit_weights[slot] = h[index.exit_id(c, slot)];
                    all_zero = all_zero && exit_weights[slot] == 0.0;
                }
                if (all_zero) continue;
                LocalSolveOutput out =
                    continued_vi(ctx.refs[c], vi_state[c], exit_weights, cfg.eta * 1e-3);
                state_changed |= out.state_changed;
                for (uint32_t slot = 0; slot < comp.n_entrances; ++slot) {
                    uint32_t e = index.entrance_id(c, slot);
                    if (out.values[slot] > g[e]) {
                        g[e] = out.values[slot];
                        g_changed = true;
                    }
                }
            }
        } else {
            // Group occurrences by (leaf, weight); one solve per group.
            struct Group {
                uint32_t representative;
                std::vector<double> exit_weights;
                std::vector<uint32_t> members;
                bool all_zero = true;
            };
            std::vector<Group> groups;
            std::map<std::string, size_t> group_of;
            for (uint32_t c : index.topo_order) {
                const Component& comp = index.components[c];
                std::vector<double> exit_weights(comp.n_exits);
                bool all_zero = true;
                for (uint32_t slot = 0; slot < comp.n_exits; ++slot) {
                    exit_weights[slot] = h[index.exit_id(c, slot)];
                    all_zero = all_zero && exit_weights[slot] == 0.0;
                }
                std::string key = weight_key_bits(comp.leaf, exit_weights);
                auto [iter, fresh] = group_of.emplace(key, groups.size());
                if (fresh)
                    groups.push_back(Group{c, std::move(exit_weights), {c}, all_zero});
                else
                    groups[iter->second].members.push_back(c);
            }

            auto apply_values = [&](const Group& group, const std::vector<double>& values) {
                for (uint32_t c : group.members) {
                    for (uint32_t slot = 0; slot < index.components[c].n_entrances; ++slot) {
                        uint32_t e = index.entrance_id(c, slot);
                        if (values[slot] > g[e]) {
                            g[e] = values[slot];
                            g_changed = true;
                        }
                    }
                }
            };

            auto solve_one = [&](const Group& group) -> GroupSolveResult {
                return solve_group(ctx.refs[group.representative], group.exit_weights, cfg.eta,
                                   cfg.cache == CacheKind::Pareto);
            };

            if (cfg.threads <= 1) {
                for (const Group& group : groups) {
                    if (group.all_zero) continue;
                    const Component& comp = index.components[group.representative];
                    if (cfg.cache == CacheKind::Exact) {
                        std::string key = weight_key_bits(comp.leaf, group.exit_weights);
                        ++exact_stats.queries;
                        auto memo = exact_cache.find(key);
                        if (memo == exact_cache.end()) {
                            GroupSolveResult solved = solve_one(group);
                            state_changed = true;
                            memo = exact_cache.emplace(key, std::move(solved.values)).first;
                        } else {
                            ++exact_stats.hits;
                        }
                        apply_values(group, memo->second);
                    } else {
                        std::vector<Rational> wq = exact(group.exit_weights);
                        auto read = cache->query(comp.leaf, wq, eta_q);
                        if (read.hit) {
                            apply_values(group, down(read.lower));
                        } else {
                            GroupSolveResult solved = solve_one(group);
                            state_changed = true;
                            cache->update(comp.leaf, solved.wq, solved.upper,
                                          std::move(solved.points));
                            if (!solved.extra_points.empty())
                                cache->update(comp.leaf, solved.wq, solved.upper,
                                              std::move(solved.extra_points));
                            apply_values(group, solved.values);
                        }
                    }
                }
            } else {
                // Queries against the iteration-start cache, parallel misses,
                // then updates in group order.
                std::vector<std::optional<GroupSolveResult>> solved(groups.size());
                std::vector<std::vector<double>> hit_values(groups.size());
                std::vector<int8_t> need_solve(groups.size(), 0);
                for (size_t gi = 0; gi < groups.size(); ++gi) {
                    if (groups[gi].all_zero) continue;
                    const Component& comp = index.components[groups[gi].representative];
                    if (cfg.cache == CacheKind::Exact) {
                        std::string key = weight_key_bits(comp.leaf, groups[gi].exit_weights);
                        ++exact_stats.queries;
                        auto memo = exact_cache.find(key);
                        if (memo != exact_cache.end()) {
                            ++exact_stats.hits;
                            hit_values[gi] = memo->second;
                        } else {
                            need_solve[gi] = 1;
                        }
                    } else {
                        auto read = cache->query(comp.leaf, exact(groups[gi].exit_weights), eta_q);
                        if (read.hit)
                            hit_values[gi] = down(read.lower);
                        else
                            need_solve[gi] = 1;
                    }
                }
                std::vector<std::future<GroupSolveResult>> futures(groups.size());
                uint32_t in_flight = 0;
                size_t next = 0, drain = 0;
                auto drain_one = [&]() {
                    while (drain < groups.size() && !futures[drain].valid()) ++drain;
                    if (drain < groups.size()) {
                        solved[drain] = futures[drain].get();
                        ++drain;
                        --in_flight;
                    }
                };
                while (next < groups.size()) {
                    if (need_solve[next]) {
                        if (in_flight >= cfg.threads) drain_one();
                        futures[next] = std::async(std::launch::async, solve_one,
                                                   std::cref(groups[next]));
                        ++in_flight;
                    }
                    ++next;
                }
                while (in_flight > 0) drain_one();

                for (size_t gi = 0; gi < groups.size(); ++gi) {
                    if (groups[gi].all_zero) continue;
                    const Component& comp = index.components[groups[gi].representative];
                    if (solved[gi]) {
                        state_changed = true;
                        if (cfg.cache == CacheKind::Exact) {
                            exact_cache.emplace(
                                weight_key_bits(comp.leaf, groups[gi].exit_weights),
                                solved[gi]->values);
                        } else {
                            cache->update(comp.leaf, solved[gi]->wq, solved[gi]->upper,
                                          std::move(solved[gi]->points));
                            if (!solved[gi]->extra_points.empty())
                                cache->update(comp.leaf, solved[gi]->wq, solved[gi]->upper,
                                              std::move(solved[gi]->extra_points));
                        }
                        apply_values(groups[gi], solved[gi]->values);
                    } else {
                        apply_values(groups[gi], hit_values[gi]);
                    }
                }
            }
        }

        h = propagate(index, g, ctx.w_down);
        ++it;

        if (!g_changed && !state_changed) {
            // Stationary: give the criterion a chance now, then either skip
            // ahead past the cache or stop (nothing will change again).
            if (static_cast<int64_t>(it) != last_checked) {
                last_checked = static_cast<int64_t>(it);
                if (try_gsc()) {
                    converged = true;
                    result.gsc_accept_iteration = static_cast<int64_t>(it);
                    break;
                }
            }
            if (cache_active) {
                it = std::max<uint64_t>(it, cfg.cache_cutoff);
            } else {
                break;
            }
        }
    }

    result.converged = converged;
    result.iterations = it;
    result.wall_seconds = clock.seconds();
    result.cache_stats = cfg.cache == CacheKind::Exact ? exact_stats : cache->stats();
    result.cache_points = cache->point_count();
    result.cache_halfspaces = cache->halfspace_count();
    result.note = note;
    result.local_lower = g;
    for (uint32_t pos = 0; pos < index.global_entrances.size(); ++pos)
        result.entrances[pos].lower = g[index.global_entrances[pos]];
    return result;
}

CviResult mono_run(const StringDiagram& d, const std::vector<Rational>& w, const CviConfig& cfg) {
    cfg.validate();
    Clock clock;
    OpenMdp flat = flatten(d);
    std::vector<StateId> exits = flat.exits();
    if (w.size() != exits.size()) throw InputError("weight vector arity does not match the global exits");

    TargetWeight<double> tw;
    tw.targets = exits;
    for (const auto& q : w) tw.weights.push_back(to_double_down(q));

    OviResult ovi = ovi_solve(flat.approx_mdp(), tw, cfg.epsilon);

    CviResult result;
    result.converged = ovi.converged;
    result.iterations = ovi.bellman_applications;
    for (StateId s : flat.entrances()) {
        EntranceValue v;
        v.name = flat.exact_mdp().state(s).name;
        v.lower = ovi.lower[s];
        if (ovi.converged) v.upper = ovi.upper[s];
        result.entrances.push_back(std::move(v));
        result.local_lower.push_back(ovi.lower[s]);
    }
    result.wall_seconds = clock.seconds();
    return result;
}

std::vector<Rational> exact_diagram_values(const StringDiagram& d, const std::vector<Rational>& w) {
    OpenMdp flat = flatten(d);
    std::vector<StateId> exits = flat.exits();
    if (w.size() != exits.size()) throw InputError("weight vector arity does not match the global exits");
    TargetWeight<Rational> tw{exits, w};
    ExactSolution solution = policy_iteration_exact(flat.exact_mdp(), tw);
    std::vector<Rational> out;
    for (StateId s : flat.entrances()) out.push_back(solution.values[s]);
    return out;
}

nlohmann::json report_json(const CviResult& result, const std::string& algorithm,
                           const std::string& model_name, double epsilon) {
    using nlohmann::json;
    json entrances = json::array();
    for (const auto& v : result.entrances) {
        json e{{"name", v.name}, {"lower", v.lower}};
        if (v.upper) e["upper"] = *v.upper;
        entrances.push_back(std::move(e));
    }
    json cache{{"Q", result.cache_stats.queries},
               {"H", result.cache_stats.hits},
               {"t_i", result.cache_stats.insert_seconds},
               {"t_r", result.cache_stats.retrieve_seconds},
               {"points", result.cache_points},
               {"halfspaces", result.cache_halfspaces}};
    json out{{"schema_version", 1},
             {"algorithm", algorithm},
             {"model", model_name},
             {"epsilon", epsilon},
             {"converged", result.converged},
             {"iterations", result.iterations},
             {"t", result.wall_seconds},
             {"t_s", result.gsc_seconds},
             {"gsc_accept_iteration", result.gsc_accept_iteration},
             {"entrances", entrances},
             {"cache", cache}};
    if (!result.note.empty()) out["note"] = result.note;
    return out;
}

}  // namespace compmdp
