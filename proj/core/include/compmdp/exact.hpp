#pragma once

#include <vector>

#include "compmdp/mdp.hpp"

namespace compmdp {

/// Exact reachability probabilities of the Markov chain induced by a DM
/// scheduler: result[s][k] is the probability of reaching targets[k] from
/// state s. The scheduler must be total on non-sink states.
std::vector<std::vector<Rational>> mc_reachability(const Mdp<Rational>& mdp,
                                                   const DmScheduler& sched,
                                                   const std::vector<StateId>& targets);

struct ExactSolution {
    std::vector<Rational> values;
    DmScheduler sched;
};

/// Exact maximum weighted reachability by policy iteration: evaluate the
/// induced chain with an exact linear solve (states that cannot reach any
/// target under the current scheduler are fixed to 0 first, which keeps the
/// system nonsingular), then switch an action only on strict improvement.
ExactSolution policy_iteration_exact(const Mdp<Rational>& mdp, const TargetWeight<Rational>& tw);

}  // namespace compmdp
