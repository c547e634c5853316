#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "compmdp/rational.hpp"

namespace compmdp {

using StateId = uint32_t;

template <typename T>
struct Outcome {
    StateId dst;
    T prob;
};

template <typename T>
struct MdpAction {
    std::string label;
    std::vector<Outcome<T>> branches;
};

template <typename T>
struct MdpState {
    std::string name;
    std::vector<MdpAction<T>> actions;
};

/// Flat MDP over a finite state set. The probability type is the numeric
/// mode: Rational for exact arithmetic, double for binary64. States with no
/// enabled action are sinks.
template <typename T>
class Mdp {
public:
    StateId add_state(std::string name);
    MdpAction<T>& add_action(StateId s, std::string label);

    size_t state_count() const { return states_.size(); }
    const MdpState<T>& state(StateId s) const { return states_[s]; }
    MdpState<T>& state(StateId s) { return states_[s]; }
    const std::vector<MdpState<T>>& states() const { return states_; }

    bool is_sink(StateId s) const { return states_[s].actions.empty(); }
    std::optional<StateId> find_state(const std::string& name) const;

    /// Distribution sums within 1e-12 (double) or exactly 1 (rational),
    /// probabilities in [0,1], branch targets in range.
    void validate() const;

private:
    std::vector<MdpState<T>> states_;
    std::unordered_map<std::string, StateId> by_name_;
};

/// Ordered targets with one weight in [0,1] each. Targets must be distinct
/// sinks of the MDP they are used with.
template <typename T>
struct TargetWeight {
    std::vector<StateId> targets;
    std::vector<T> weights;

    void validate(const Mdp<T>& mdp) const;
};

/// Action choice per state, an index into the state's action list; -1 at
/// sinks.
using DmScheduler = std::vector<int32_t>;

enum class Rounding { Down, Up, Nearest };

/// Binary64 copy of an exact MDP. Rounding::Down lowers every branch
/// probability, so any scheduler's weighted reachability in the copy is at
/// most its exact value; value iteration on the copy then yields sound
/// lower bounds for the exact model.
Mdp<double> float_copy(const Mdp<Rational>& mdp, Rounding rounding = Rounding::Down);

Mdp<Rational> exact_copy(const Mdp<double>& mdp);

extern template class Mdp<double>;
extern template class Mdp<Rational>;
extern template struct TargetWeight<double>;
extern template struct TargetWeight<Rational>;

}  // namespace compmdp
