#include "compmdp/mdp.hpp"

#include <cmath>
#include <set>

#include "compmdp/errors.hpp"

namespace compmdp {

template <typename T>
StateId Mdp<T>::add_state(std::string name) {
    if (by_name_.count(name))
        throw ModelError("duplicate state name '" + name + "'");
    StateId id = static_cast<StateId>(states_.size());
    by_name_.emplace(name, id);
    states_.push_back(MdpState<T>{std::move(name), {}});
    return id;
}

template <typename T>
MdpAction<T>& Mdp<T>::add_action(StateId s, std::string label) {
    return states_.at(s).actions.emplace_back(MdpAction<T>{std::move(label), {}});
}

template <typename T>
std::optional<StateId> Mdp<T>::find_state(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

namespace {

bool sums_to_one(const Rational& total) { return total == 1; }
bool sums_to_one(double total) { return std::abs(total - 1.0) <= 1e-12; }

template <typename T>
bool in_unit_interval(const T& p) { return p >= 0 && p <= 1; }

}  // namespace

template <typename T>
void Mdp<T>::validate() const {
    for (StateId s = 0; s < states_.size(); ++s) {
        for (const auto& action : states_[s].actions) {
            T total{};
            for (const auto& branch : action.branches) {
                if (branch.dst >= states_.size())
                    throw ModelError("state '" + states_[s].name + "' action '" + action.label +
                                     "' targets an out-of-range state");
                if (!in_unit_interval(branch.prob))
                    throw ModelError("state '" + states_[s].name + "' action '" + action.label +
                                     "' has a probability outside [0,1]");
                total += branch.prob;
            }
            if (!sums_to_one(total))
                throw ModelError("state '" + states_[s].name + "' action '" + action.label +
                                 "' distribution does not sum to 1");
        }
    }
}

template <typename T>
void TargetWeight<T>::validate(const Mdp<T>& mdp) const {
    if (targets.size() != weights.size())
        throw ModelError("target/weight length mismatch");
    std::set<StateId> seen;
    for (size_t k = 0; k < targets.size(); ++k) {
        if (targets[k] >= mdp.state_count())
            throw ModelError("target state out of range");
        if (!seen.insert(targets[k]).second)
            throw ModelError("duplicate target state '" + mdp.state(targets[k]).name + "'");
        if (!mdp.is_sink(targets[k]))
            throw ModelError("target state '" + mdp.state(targets[k]).name + "' is not a sink");
        if (!in_unit_interval(weights[k]))
            throw ModelError("weight outside [0,1] for target '" + mdp.state(targets[k]).name + "'");
    }
}

Mdp<double> float_copy(const Mdp<Rational>& mdp, Rounding rounding) {
    Mdp<double> out;
    for (StateId s = 0; s < mdp.state_count(); ++s) out.add_state(mdp.state(s).name);
    for (StateId s = 0; s < mdp.state_count(); ++s) {
        for (const auto& action : mdp.state(s).actions) {
            auto& a = out.add_action(s, action.label);
            for (const auto& branch : action.branches) {
                double p;
                switch (rounding) {
                    case Rounding::Down: p = to_double_down(branch.prob); break;
                    case Rounding::Up: p = to_double_up(branch.prob); break;
                    default: p = branch.prob.convert_to<double>(); break;
                }
                a.branches.push_back({branch.dst, p});
            }
        }
    }
    return out;
}

Mdp<Rational> exact_copy(const Mdp<double>& mdp) {
    Mdp<Rational> out;
    for (StateId s = 0; s < mdp.state_count(); ++s) out.add_state(mdp.state(s).name);
    for (StateId s = 0; s < mdp.state_count(); ++s) {
        for (const auto& action : mdp.state(s).actions) {
            auto& a = out.add_action(s, action.label);
            for (const auto& branch : action.branches)
                a.branches.push_back({branch.dst, exact(branch.prob)});
        }
    }
    return out;
}

template class Mdp<double>;
template class Mdp<Rational>;
template struct TargetWeight<double>;
template struct TargetWeight<Rational>;

}  // namespace compmdp
