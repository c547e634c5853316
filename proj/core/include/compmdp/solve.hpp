#pragma once

#include <cstdint>
#include <vector>

#include "compmdp/mdp.hpp"

namespace compmdp {

/// One application of the weighted Bellman operator: targets are pinned to
/// their weights, every other state takes the best one-step expectation
/// (empty action set gives 0).
template <typename T>
std::vector<T> bellman_apply(const Mdp<T>& mdp, const TargetWeight<T>& tw,
                             const std::vector<T>& f);

/// Kleene iteration from `start`; caller guarantees start is below the
/// least fixed point (e.g. the zero vector or an earlier iterate).
template <typename T>
std::vector<T> value_iterate(const Mdp<T>& mdp, const TargetWeight<T>& tw,
                             std::vector<T> start, uint64_t sweeps);

/// Park check: true iff bellman_apply(u) <= u pointwise (absolute slack
/// 1e-12 in double mode, exact otherwise). True implies u bounds the least
/// fixed point from above.
template <typename T>
bool verify_upper(const Mdp<T>& mdp, const TargetWeight<T>& tw, const std::vector<T>& u);

/// Scheduler picking, per non-sink state, the first action maximizing the
/// one-step expectation of `values`.
template <typename T>
DmScheduler greedy_scheduler(const Mdp<T>& mdp, const TargetWeight<T>& tw,
                             const std::vector<T>& values);

struct OviOptions {
    uint64_t max_bellman_applications = 10'000'000;
    int refinement_rounds = 12;
    uint64_t initial_sweep_budget = 64;
    /// Optional warm start, must be below the least fixed point.
    std::vector<double> start;
};

struct OviResult {
    std::vector<double> lower;
    std::vector<double> upper;
    DmScheduler sched;
    bool converged = false;
    uint64_t bellman_applications = 0;
};

/// Optimistic value iteration: iterate a lower bound, guess the candidate
/// u := min(1, l + eta) and accept it on a Park check; each failed round
/// doubles the inner sweep budget. A run that exhausts its budget reports
/// converged=false with the last (still sound) lower bound.
OviResult ovi_solve(const Mdp<double>& mdp, const TargetWeight<double>& tw, double eta,
                    const OviOptions& options = {});

extern template std::vector<double> bellman_apply(const Mdp<double>&, const TargetWeight<double>&,
                                                  const std::vector<double>&);
extern template std::vector<Rational> bellman_apply(const Mdp<Rational>&,
                                                    const TargetWeight<Rational>&,
                                                    const std::vector<Rational>&);
extern template std::vector<double> value_iterate(const Mdp<double>&, const TargetWeight<double>&,
                                                  std::vector<double>, uint64_t);
extern template std::vector<Rational> value_iterate(const Mdp<Rational>&,
                                                    const TargetWeight<Rational>&,
                                                    std::vector<Rational>, uint64_t);
extern template bool verify_upper(const Mdp<double>&, const TargetWeight<double>&,
                                  const std::vector<double>&);
extern template bool verify_upper(const Mdp<Rational>&, const TargetWeight<Rational>&,
                                  const std::vector<Rational>&);
extern template DmScheduler greedy_scheduler(const Mdp<double>&, const TargetWeight<double>&,
                                             const std::vector<double>&);
extern template DmScheduler greedy_scheduler(const Mdp<Rational>&, const TargetWeight<Rational>&,
                                             const std::vector<Rational>&);

}  // namespace compmdp
