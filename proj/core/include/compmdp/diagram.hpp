#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "compmdp/mdp.hpp"

namespace compmdp {

/// The four ordered, pairwise disjoint open-end lists of an open MDP.
struct OpenEnds {
    std::vector<StateId> right_entrances;
    std::vector<StateId> left_entrances;
    std::vector<StateId> right_exits;
    std::vector<StateId> left_exits;
};

/// (right_in, left_in) -> (right_out, left_out), where right_in counts
/// right entrances, left_in left exits, right_out right exits and left_out
/// left entrances.
struct Arity {
    uint32_t right_in = 0, left_in = 0, right_out = 0, left_out = 0;

    bool operator==(const Arity&) const = default;
    std::string str() const;
};

/// An MDP with open ends. Exits are sinks. Holds the exact model plus a
/// binary64 copy with branch probabilities rounded down, so float-mode
/// value iteration stays below the exact values.
class OpenMdp {
public:
    OpenMdp(Mdp<Rational> mdp, OpenEnds io);

    const Mdp<Rational>& exact_mdp() const { return mdp_; }
    const Mdp<double>& approx_mdp() const { return approx_; }
    const OpenEnds& io() const { return io_; }
    Arity arity() const;

    /// Right entrances then left entrances.
    std::vector<StateId> entrances() const;
    /// Right exits then left exits.
    std::vector<StateId> exits() const;

private:
    Mdp<Rational> mdp_;
    Mdp<double> approx_;
    OpenEnds io_;
};

/// Sequential composition: a's right exits merge into b's right entrances
/// and b's left exits into a's left entrances; throws CompositionError on
/// middle-arity mismatch, ModelError on state-name collisions.
OpenMdp seq_compose(const OpenMdp& a, const OpenMdp& b);

/// Sum: disjoint union, open ends concatenated in order.
OpenMdp sum_compose(const OpenMdp& a, const OpenMdp& b);

struct DiagramNode {
    enum class Kind { Leaf, Seq, Sum };
    Kind kind;
    std::string leaf;  // Kind::Leaf only
    std::shared_ptr<const DiagramNode> left, right;
};
using NodePtr = std::shared_ptr<const DiagramNode>;

NodePtr make_leaf(std::string name);
NodePtr make_seq(NodePtr left, NodePtr right);
NodePtr make_sum(NodePtr left, NodePtr right);

using LeafTable = std::map<std::string, OpenMdp>;

/// A string diagram: an AST over named oMDP constants with binary
/// sequential composition and sum nodes, plus the table resolving names.
class StringDiagram {
public:
    StringDiagram(NodePtr root, LeafTable leaves);

    const DiagramNode& root() const { return *root_; }
    NodePtr root_ptr() const { return root_; }
    const LeafTable& leaves() const { return *leaves_; }
    const OpenMdp& leaf(const std::string& name) const;

private:
    NodePtr root_;
    std::shared_ptr<const LeafTable> leaves_;
};

struct ArityError {
    std::string path;  // AST path of the offending Seq node
    Arity left, right;
    std::string str() const;
};

/// Collects every sequential-composition node whose middle arities do not
/// match; empty result means the diagram is well-formed.
std::vector<ArityError> validate_arities(const StringDiagram& d);

/// One open end of one component occurrence.
struct LocalEnd {
    uint32_t component;  // index into ComponentIndex::components
    uint32_t slot;       // position in the component's right-then-left list
    StateId state;       // state id inside the leaf MDP
    std::string name;    // "occurrence/state-name", also the flattened state name
};

struct Component {
    std::string leaf;        // nominal leaf name
    std::string occurrence;  // e.g. "A@0"
    uint32_t entrance_base = 0, n_entrances = 0;
    uint32_t exit_base = 0, n_exits = 0;
};

/// Occurrence-level index of a diagram: local open ends, the wiring map of
/// sequential composition, the surviving global ends, and a right-child-
/// first component order.
struct ComponentIndex {
    std::vector<Component> components;
    std::vector<std::string> leaf_names;  // distinct nominal leaves, first-seen order
    std::vector<LocalEnd> entrances;
    std::vector<LocalEnd> exits;
    /// exits.size() entries: partner local entrance id, or -1 for global exits.
    std::vector<int32_t> wiring;
    std::vector<uint32_t> global_entrances;  // entrance ids, interface order
    std::vector<uint32_t> global_exits;      // exit ids, interface order
    std::vector<uint32_t> topo_order;        // component indices

    uint32_t entrance_id(uint32_t component, uint32_t slot) const {
        return components[component].entrance_base + slot;
    }
    uint32_t exit_id(uint32_t component, uint32_t slot) const {
        return components[component].exit_base + slot;
    }
};

ComponentIndex index_diagram(const StringDiagram& d);

/// Operational semantics: evaluates the AST by folding seq_compose and
/// sum_compose, with leaf states renamed "occurrence/state-name".
OpenMdp flatten(const StringDiagram& d);

}  // namespace compmdp
