#include "compmdp/exact.hpp"

#include <algorithm>
#include <queue>

#include "compmdp/errors.hpp"
#include "compmdp/linear.hpp"

namespace compmdp {

namespace {

/// Non-target states with positive probability of reaching any target in
/// the chain induced by sched (backward closure over positive-probability
/// scheduler edges).
std::vector<int8_t> positive_reach_mask(const Mdp<Rational>& mdp, const DmScheduler& sched,
                                        const std::vector<StateId>& targets) {
    const size_t n = mdp.state_count();
    std::vector<std::vector<StateId>> predecessors(n);
    for (StateId s = 0; s < n; ++s) {
        if (sched[s] < 0) continue;
        const auto& action = mdp.state(s).actions.at(static_cast<size_t>(sched[s]));
        for (const auto& branch : action.branches)
            if (branch.prob > 0) predecessors[branch.dst].push_back(s);
    }
    std::vector<int8_t> reach(n, 0);
    std::queue<StateId> queue;
    for (StateId t : targets) {
        reach[t] = 1;
        queue.push(t);
    }
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop();
        for (StateId p : predecessors[s]) {
            if (!reach[p]) {
                reach[p] = 1;
                queue.push(p);
            }
        }
    }
    for (StateId t : targets) reach[t] = 0;  // targets handled separately
    return reach;
}

}  // namespace

std::vector<std::vector<Rational>> mc_reachability(const Mdp<Rational>& mdp,
                                                   const DmScheduler& sched,
                                                   const std::vector<StateId>& targets) {
    const size_t n = mdp.state_count();
    if (sched.size() != n) throw ModelError("scheduler length mismatch");
    for (StateId s = 0; s < n; ++s) {
        if (mdp.is_sink(s)) continue;
        if (sched[s] < 0 || static_cast<size_t>(sched[s]) >= mdp.state(s).actions.size())
            throw ModelError("scheduler not total on non-sink state '" + mdp.state(s).name + "'");
    }

    std::vector<int8_t> in_system = positive_reach_mask(mdp, sched, targets);
    std::vector<uint32_t> row_of(n, UINT32_MAX);
    std::vector<StateId> system_states;
    for (StateId s = 0; s < n; ++s) {
        if (in_system[s]) {
            row_of[s] = static_cast<uint32_t>(system_states.size());
            system_states.push_back(s);
        }
    }
    std::vector<int32_t> target_index(n, -1);
    for (size_t kk = 0; kk < targets.size(); ++kk)
        target_index[targets[kk]] = static_cast<int32_t>(kk);

    const uint32_t m = static_cast<uint32_t>(system_states.size());
    std::vector<SparseRow> rows(m);
    std::vector<std::vector<Rational>> rhs(targets.size(), std::vector<Rational>(m));
    for (uint32_t r = 0; r < m; ++r) {
        StateId s = system_states[r];
        const auto& action = mdp.state(s).actions.at(static_cast<size_t>(sched[s]));
        rows[r].emplace_back(r, Rational(1));
        for (const auto& branch : action.branches) {
            if (in_system[branch.dst]) {
                rows[r].emplace_back(row_of[branch.dst], -branch.prob);
            } else if (target_index[branch.dst] >= 0) {
                rhs[static_cast<size_t>(target_index[branch.dst])][r] += branch.prob;
            }
        }
    }
    std::vector<std::vector<Rational>> solved = solve_sparse_linear(rows, rhs);

    std::vector<std::vector<Rational>> result(n, std::vector<Rational>(targets.size()));
    for (size_t kk = 0; kk < targets.size(); ++kk) {
        result[targets[kk]][kk] = 1;
        for (uint32_t r = 0; r < m; ++r) result[system_states[r]][kk] = solved[kk][r];
    }
    return result;
}

namespace {

std::vector<Rational> evaluate_policy(const Mdp<Rational>& mdp, const TargetWeight<Rational>& tw,
                                      const DmScheduler& sched) {
    const size_t n = mdp.state_count();
    std::vector<Rational> values(n);
    for (size_t kk = 0; kk < tw.targets.size(); ++kk) values[tw.targets[kk]] = tw.weights[kk];

    std::vector<int8_t> in_system = positive_reach_mask(mdp, sched, tw.targets);
    std::vector<uint32_t> row_of(n, UINT32_MAX);
    std::vector<StateId> system_states;
    for (StateId s = 0; s < n; ++s) {
        if (in_system[s]) {
            row_of[s] = static_cast<uint32_t>(system_states.size());
            system_states.push_back(s);
        }
    }
    const uint32_t m = static_cast<uint32_t>(system_states.size());
    if (m == 0) return values;

    std::vector<SparseRow> rows(m);
    std::vector<Rational> rhs(m);
    for (uint32_t r = 0; r < m; ++r) {
        StateId s = system_states[r];
        const auto& action = mdp.state(s).actions.at(static_cast<size_t>(sched[s]));
        rows[r].emplace_back(r, Rational(1));
        for (const auto& branch : action.branches) {
            if (in_system[branch.dst])
                rows[r].emplace_back(row_of[branch.dst], -branch.prob);
            else
                rhs[r] += branch.prob * values[branch.dst];  // target weight or 0
        }
    }
    auto solved = solve_sparse_linear(rows, {rhs});
    for (uint32_t r = 0; r < m; ++r) values[system_states[r]] = solved[0][r];
    return values;
}

}  // namespace

ExactSolution policy_iteration_exact(const Mdp<Rational>& mdp, const TargetWeight<Rational>& tw) {
    tw.validate(mdp);
    const size_t n = mdp.state_count();
    std::vector<int8_t> is_target(n, 0);
    for (StateId t : tw.targets) is_target[t] = 1;

    DmScheduler sched(n, -1);
    for (StateId s = 0; s < n; ++s)
        if (!mdp.is_sink(s)) sched[s] = 0;

    // Strict-improvement policy iteration terminates: each round the exact
    // value function strictly increases somewhere and never decreases.
    constexpr int kMaxRounds = 1'000'000;
    std::vector<Rational> values;
    for (int round = 0; round < kMaxRounds; ++round) {
        values = evaluate_policy(mdp, tw, sched);
        bool improved = false;
        for (StateId s = 0; s < n; ++s) {
            if (sched[s] < 0 || is_target[s]) continue;
            const auto& actions = mdp.state(s).actions;
            Rational best = values[s];
            int32_t pick = sched[s];
            for (size_t a = 0; a < actions.size(); ++a) {
                Rational q{};
                for (const auto& branch : actions[a].branches)
                    q += branch.prob * values[branch.dst];
                if (q > best) {
                    best = q;
                    pick = static_cast<int32_t>(a);
                }
            }
            if (pick != sched[s]) {
                sched[s] = pick;
                improved = true;
            }
        }
        if (!improved) return {std::move(values), std::move(sched)};
    }
    throw SoundnessFault("policy iteration did not stabilize");
}

}  // namespace compmdp
