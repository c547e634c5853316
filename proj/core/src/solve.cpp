#include "compmdp/solve.hpp"

#include <algorithm>
#include <cmath>

#include "compmdp/errors.hpp"

namespace compmdp {

namespace {

template <typename T>
std::vector<int8_t> target_mask(const Mdp<T>& mdp, const TargetWeight<T>& tw,
                                std::vector<T>* pinned) {
    std::vector<int8_t> mask(mdp.state_count(), 0);
    if (pinned) pinned->assign(mdp.state_count(), T{});
    for (size_t k = 0; k < tw.targets.size(); ++k) {
        mask[tw.targets[k]] = 1;
        if (pinned) (*pinned)[tw.targets[k]] = tw.weights[k];
    }
    return mask;
}

constexpr double kParkSlack = 1e-12;

bool leq_with_slack(double lhs, double rhs) { return lhs <= rhs + kParkSlack; }
bool leq_with_slack(const Rational& lhs, const Rational& rhs) { return lhs <= rhs; }

// Round-to-nearest accumulation can push a sum of k nonnegative terms up to
// k ulps above its real value; deflating by twice that keeps double-mode
// Bellman values below the real-arithmetic ones, so iterates from below
// never cross the exact fixed point.
double deflate(double acc, size_t terms) {
    return acc - acc * (2.22044604925031308e-16 * static_cast<double>(terms + 1));
}
Rational deflate(const Rational& acc, size_t) { return acc; }

}  // namespace

template <typename T>
std::vector<T> bellman_apply(const Mdp<T>& mdp, const TargetWeight<T>& tw,
                             const std::vector<T>& f) {
    if (f.size() != mdp.state_count())
        throw ModelError("value vector length does not match the state count");
    std::vector<T> pinned;
    std::vector<int8_t> is_target = target_mask(mdp, tw, &pinned);
    std::vector<T> out(mdp.state_count(), T{});
    for (StateId s = 0; s < mdp.state_count(); ++s) {
        if (is_target[s]) {
            out[s] = pinned[s];
            continue;
        }
        T best{};
        for (const auto& action : mdp.state(s).actions) {
            T value{};
            for (const auto& branch : action.branches) value += branch.prob * f[branch.dst];
            value = deflate(value, action.branches.size());
            if (value > best) best = value;
        }
        out[s] = best;
    }
    return out;
}

template <typename T>
std::vector<T> value_iterate(const Mdp<T>& mdp, const TargetWeight<T>& tw,
                             std::vector<T> start, uint64_t sweeps) {
    if (sweeps == 0) return start;
    // Iteration starts with targets already at their weights; the least
    // element of the iteration space carries them.
    for (size_t k = 0; k < tw.targets.size(); ++k) start.at(tw.targets[k]) = tw.weights[k];
    for (uint64_t i = 0; i < sweeps; ++i) start = bellman_apply(mdp, tw, start);
    return start;
}

template <typename T>
bool verify_upper(const Mdp<T>& mdp, const TargetWeight<T>& tw, const std::vector<T>& u) {
    std::vector<T> phi = bellman_apply(mdp, tw, u);
    for (StateId s = 0; s < mdp.state_count(); ++s)
        if (!leq_with_slack(phi[s], u[s])) return false;
    return true;
}

template <typename T>
DmScheduler greedy_scheduler(const Mdp<T>& mdp, const TargetWeight<T>& tw,
                             const std::vector<T>& values) {
    std::vector<int8_t> is_target = target_mask<T>(mdp, tw, nullptr);
    DmScheduler sched(mdp.state_count(), -1);
    for (StateId s = 0; s < mdp.state_count(); ++s) {
        if (is_target[s] || mdp.is_sink(s)) continue;
        T best{};
        int32_t pick = 0;
        const auto& actions = mdp.state(s).actions;
        for (size_t a = 0; a < actions.size(); ++a) {
            T value{};
            for (const auto& branch : actions[a].branches) value += branch.prob * values[branch.dst];
            if (a == 0 || value > best) {
                best = value;
                pick = static_cast<int32_t>(a);
            }
        }
        sched[s] = pick;
    }
    return sched;
}

OviResult ovi_solve(const Mdp<double>& mdp, const TargetWeight<double>& tw, double eta,
                    const OviOptions& options) {
    if (!(eta > 0)) throw ModelError("ovi_solve requires eta > 0");
    tw.validate(mdp);

    OviResult result;
    result.lower = options.start.empty() ? std::vector<double>(mdp.state_count(), 0.0)
                                         : options.start;
    if (result.lower.size() != mdp.state_count())
        throw ModelError("ovi_solve start vector length mismatch");
    for (size_t k = 0; k < tw.targets.size(); ++k)
        result.lower[tw.targets[k]] = tw.weights[k];

    uint64_t budget = options.initial_sweep_budget;
    // Sweep until the per-sweep change is well below eta, so the candidate
    // guess sits close to the fixed point before the Park check. Each
    // failed round tightens the settle threshold as well as doubling the
    // budget; slowly mixing loops need the iterate essentially stationary
    // before the candidate can pass.
    double settle = eta * 1e-3;

    for (int round = 0; round <= options.refinement_rounds; ++round, settle /= 16) {
        for (uint64_t sweep = 0; sweep < budget; ++sweep) {
            if (result.bellman_applications >= options.max_bellman_applications) break;
            std::vector<double> next = bellman_apply(mdp, tw, result.lower);
            ++result.bellman_applications;
            double delta = 0;
            for (size_t s = 0; s < next.size(); ++s)
                delta = std::max(delta, next[s] - result.lower[s]);
            result.lower = std::move(next);
            if (delta <= settle) break;
        }

        if (result.bellman_applications >= options.max_bellman_applications) break;
        std::vector<double> candidate(result.lower.size());
        for (size_t s = 0; s < candidate.size(); ++s)
            candidate[s] = std::min(1.0, result.lower[s] + eta);
        std::vector<double> phi = bellman_apply(mdp, tw, candidate);
        ++result.bellman_applications;
        bool park = true;
        for (size_t s = 0; s < candidate.size(); ++s)
            if (phi[s] > candidate[s] + 1e-12) { park = false; break; }
        if (park) {
            // phi is itself a verified upper bound and at least as tight.
            result.upper = std::move(phi);
            for (size_t s = 0; s < result.upper.size(); ++s)
                result.upper[s] = std::max(result.upper[s], result.lower[s]);
            result.converged = true;
            result.sched = greedy_scheduler(mdp, tw, result.lower);
            return result;
        }
        budget *= 2;
    }

    result.upper.assign(mdp.state_count(), 1.0);
    result.converged = false;
    result.sched = greedy_scheduler(mdp, tw, result.lower);
    return result;
}

template std::vector<double> bellman_apply(const Mdp<double>&, const TargetWeight<double>&,
                                           const std::vector<double>&);
template std::vector<Rational> bellman_apply(const Mdp<Rational>&, const TargetWeight<Rational>&,
                                             const std::vector<Rational>&);
template std::vector<double> value_iterate(const Mdp<double>&, const TargetWeight<double>&,
                                           std::vector<double>, uint64_t);
template std::vector<Rational> value_iterate(const Mdp<Rational>&, const TargetWeight<Rational>&,
                                             std::vector<Rational>, uint64_t);
template bool verify_upper(const Mdp<double>&, const TargetWeight<double>&,
                           const std::vector<double>&);
template bool verify_upper(const Mdp<Rational>&, const TargetWeight<Rational>&,
                           const std::vector<Rational>&);
template DmScheduler greedy_scheduler(const Mdp<double>&, const TargetWeight<double>&,
                                      const std::vector<double>&);
template DmScheduler greedy_scheduler(const Mdp<Rational>&, const TargetWeight<Rational>&,
                                      const std::vector<Rational>&);

}  // namespace compmdp
