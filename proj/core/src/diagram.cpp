#include "compmdp/diagram.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "compmdp/errors.hpp"

namespace compmdp {

std::string Arity::str() const {
    std::ostringstream os;
    os << "(" << right_in << "," << left_in << ")->(" << right_out << "," << left_out << ")";
    return os.str();
}

std::string ArityError::str() const {
    return "arity mismatch at " + (path.empty() ? std::string("root") : path) + ": " +
           left.str() + " vs " + right.str();
}

OpenMdp::OpenMdp(Mdp<Rational> mdp, OpenEnds io)
    : mdp_(std::move(mdp)), approx_(float_copy(mdp_, Rounding::Down)), io_(std::move(io)) {
    mdp_.validate();
    std::set<StateId> seen;
    auto check_list = [&](const std::vector<StateId>& list, const char* what, bool must_be_sink) {
        for (StateId s : list) {
            if (s >= mdp_.state_count())
                throw ModelError(std::string(what) + " out of range");
            if (!seen.insert(s).second)
                throw ModelError("open end '" + mdp_.state(s).name + "' listed twice");
            if (must_be_sink && !mdp_.is_sink(s))
                throw ModelError("exit '" + mdp_.state(s).name + "' is not a sink");
        }
    };
    check_list(io_.right_entrances, "right entrance", false);
    check_list(io_.left_entrances, "left entrance", false);
    check_list(io_.right_exits, "right exit", true);
    check_list(io_.left_exits, "left exit", true);
}

Arity OpenMdp::arity() const {
    return Arity{static_cast<uint32_t>(io_.right_entrances.size()),
                 static_cast<uint32_t>(io_.left_exits.size()),
                 static_cast<uint32_t>(io_.right_exits.size()),
                 static_cast<uint32_t>(io_.left_entrances.size())};
}

std::vector<StateId> OpenMdp::entrances() const {
    std::vector<StateId> out = io_.right_entrances;
    out.insert(out.end(), io_.left_entrances.begin(), io_.left_entrances.end());
    return out;
}

std::vector<StateId> OpenMdp::exits() const {
    std::vector<StateId> out = io_.right_exits;
    out.insert(out.end(), io_.left_exits.begin(), io_.left_exits.end());
    return out;
}

OpenMdp seq_compose(const OpenMdp& a, const OpenMdp& b) {
    Arity aa = a.arity(), ab = b.arity();
    if (aa.right_out != ab.right_in || aa.left_out != ab.left_in)
        throw CompositionError("sequential composition of " + aa.str() + " with " + ab.str() +
                               ": middle arities differ");

    const auto& am = a.exact_mdp();
    const auto& bm = b.exact_mdp();
    std::vector<int8_t> a_removed(am.state_count(), 0), b_removed(bm.state_count(), 0);
    for (StateId s : a.io().right_exits) a_removed[s] = 1;
    for (StateId s : b.io().left_exits) b_removed[s] = 1;

    Mdp<Rational> merged;
    std::vector<StateId> a_map(am.state_count(), UINT32_MAX), b_map(bm.state_count(), UINT32_MAX);
    for (StateId s = 0; s < am.state_count(); ++s)
        if (!a_removed[s]) a_map[s] = merged.add_state(am.state(s).name);
    for (StateId s = 0; s < bm.state_count(); ++s)
        if (!b_removed[s]) b_map[s] = merged.add_state(bm.state(s).name);
    // Removed exits forward to their partner entrance.
    for (size_t i = 0; i < a.io().right_exits.size(); ++i)
        a_map[a.io().right_exits[i]] = b_map[b.io().right_entrances[i]];
    for (size_t i = 0; i < b.io().left_exits.size(); ++i)
        b_map[b.io().left_exits[i]] = a_map[a.io().left_entrances[i]];

    for (StateId s = 0; s < am.state_count(); ++s) {
        if (a_removed[s]) continue;
        for (const auto& action : am.state(s).actions) {
            auto& copy = merged.add_action(a_map[s], action.label);
            for (const auto& branch : action.branches)
                copy.branches.push_back({a_map[branch.dst], branch.prob});
        }
    }
    for (StateId s = 0; s < bm.state_count(); ++s) {
        if (b_removed[s]) continue;
        for (const auto& action : bm.state(s).actions) {
            auto& copy = merged.add_action(b_map[s], action.label);
            for (const auto& branch : action.branches)
                copy.branches.push_back({b_map[branch.dst], branch.prob});
        }
    }

    auto remap = [](const std::vector<StateId>& list, const std::vector<StateId>& map) {
        std::vector<StateId> out;
        out.reserve(list.size());
        for (StateId s : list) out.push_back(map[s]);
        return out;
    };
    OpenEnds io{remap(a.io().right_entrances, a_map), remap(b.io().left_entrances, b_map),
                remap(b.io().right_exits, b_map), remap(a.io().left_exits, a_map)};
    return OpenMdp(std::move(merged), std::move(io));
}

OpenMdp sum_compose(const OpenMdp& a, const OpenMdp& b) {
    const auto& am = a.exact_mdp();
    const auto& bm = b.exact_mdp();
    Mdp<Rational> merged;
    std::vector<StateId> a_map(am.state_count()), b_map(bm.state_count());
    for (StateId s = 0; s < am.state_count(); ++s) a_map[s] = merged.add_state(am.state(s).name);
    for (StateId s = 0; s < bm.state_count(); ++s) b_map[s] = merged.add_state(bm.state(s).name);
    for (StateId s = 0; s < am.state_count(); ++s)
        for (const auto& action : am.state(s).actions) {
            auto& copy = merged.add_action(a_map[s], action.label);
            for (const auto& branch : action.branches)
                copy.branches.push_back({a_map[branch.dst], branch.prob});
        }
    for (StateId s = 0; s < bm.state_count(); ++s)
        for (const auto& action : bm.state(s).actions) {
            auto& copy = merged.add_action(b_map[s], action.label);
            for (const auto& branch : action.branches)
                copy.branches.push_back({b_map[branch.dst], branch.prob});
        }

    auto concat = [](const std::vector<StateId>& xs, const std::vector<StateId>& xmap,
                     const std::vector<StateId>& ys, const std::vector<StateId>& ymap) {
        std::vector<StateId> out;
        out.reserve(xs.size() + ys.size());
        for (StateId s : xs) out.push_back(xmap[s]);
        for (StateId s : ys) out.push_back(ymap[s]);
        return out;
    };
    OpenEnds io{concat(a.io().right_entrances, a_map, b.io().right_entrances, b_map),
                concat(a.io().left_entrances, a_map, b.io().left_entrances, b_map),
                concat(a.io().right_exits, a_map, b.io().right_exits, b_map),
                concat(a.io().left_exits, a_map, b.io().left_exits, b_map)};
    return OpenMdp(std::move(merged), std::move(io));
}

NodePtr make_leaf(std::string name) {
    return std::make_shared<DiagramNode>(DiagramNode{DiagramNode::Kind::Leaf, std::move(name), nullptr, nullptr});
}
NodePtr make_seq(NodePtr left, NodePtr right) {
    return std::make_shared<DiagramNode>(DiagramNode{DiagramNode::Kind::Seq, {}, std::move(left), std::move(right)});
}
NodePtr make_sum(NodePtr left, NodePtr right) {
    return std::make_shared<DiagramNode>(DiagramNode{DiagramNode::Kind::Sum, {}, std::move(left), std::move(right)});
}

StringDiagram::StringDiagram(NodePtr root, LeafTable leaves)
    : root_(std::move(root)), leaves_(std::make_shared<const LeafTable>(std::move(leaves))) {
    if (!root_) throw ModelError("empty diagram");
}

const OpenMdp& StringDiagram::leaf(const std::string& name) const {
    auto it = leaves_->find(name);
    if (it == leaves_->end()) throw ModelError("unknown leaf '" + name + "'");
    return it->second;
}

namespace {

Arity node_arity(const StringDiagram& d, const DiagramNode& node) {
    switch (node.kind) {
        case DiagramNode::Kind::Leaf:
            return d.leaf(node.leaf).arity();
        case DiagramNode::Kind::Seq: {
            Arity l = node_arity(d, *node.left), r = node_arity(d, *node.right);
            return Arity{l.right_in, l.left_in, r.right_out, r.left_out};
        }
        case DiagramNode::Kind::Sum: {
            Arity l = node_arity(d, *node.left), r = node_arity(d, *node.right);
            return Arity{l.right_in + r.right_in, l.left_in + r.left_in,
                         l.right_out + r.right_out, l.left_out + r.left_out};
        }
    }
    throw ModelError("corrupt diagram node");
}

void collect_arity_errors(const StringDiagram& d, const DiagramNode& node, const std::string& path,
                          std::vector<ArityError>& out) {
    if (node.kind == DiagramNode::Kind::Leaf) return;
    const char* op = node.kind == DiagramNode::Kind::Seq ? "seq" : "sum";
    collect_arity_errors(d, *node.left, path + "/" + op + ".left", out);
    collect_arity_errors(d, *node.right, path + "/" + op + ".right", out);
    if (node.kind == DiagramNode::Kind::Seq) {
        Arity l = node_arity(d, *node.left), r = node_arity(d, *node.right);
        if (l.right_out != r.right_in || l.left_out != r.left_in)
            out.push_back(ArityError{path, l, r});
    }
}

/// Occurrence names "leaf@k" count left-to-right AST visits per leaf name;
/// index_diagram and flatten use the same numbering so state names line up.
class OccurrenceCounter {
public:
    std::string next(const std::string& leaf) {
        return leaf + "@" + std::to_string(counters_[leaf]++);
    }

private:
    std::map<std::string, uint32_t> counters_;
};

uint32_t leaf_count(const DiagramNode& node) {
    if (node.kind == DiagramNode::Kind::Leaf) return 1;
    return leaf_count(*node.left) + leaf_count(*node.right);
}

struct Interface {
    std::vector<uint32_t> r_entr, l_entr, r_exit, l_exit;  // end ids
};

struct IndexBuilder {
    const StringDiagram& d;
    OccurrenceCounter occurrences;
    ComponentIndex out;

    Interface build(const DiagramNode& node) {
        switch (node.kind) {
            case DiagramNode::Kind::Leaf: {
                const OpenMdp& leaf = d.leaf(node.leaf);
                uint32_t comp = static_cast<uint32_t>(out.components.size());
                Component c;
                c.leaf = node.leaf;
                c.occurrence = occurrences.next(node.leaf);
                c.entrance_base = static_cast<uint32_t>(out.entrances.size());
                c.exit_base = static_cast<uint32_t>(out.exits.size());
                std::vector<StateId> ent = leaf.entrances(), exi = leaf.exits();
                c.n_entrances = static_cast<uint32_t>(ent.size());
                c.n_exits = static_cast<uint32_t>(exi.size());
                if (std::find(out.leaf_names.begin(), out.leaf_names.end(), node.leaf) ==
                    out.leaf_names.end())
                    out.leaf_names.push_back(node.leaf);
                out.components.push_back(c);
                Interface iface;
                for (uint32_t slot = 0; slot < ent.size(); ++slot) {
                    uint32_t id = static_cast<uint32_t>(out.entrances.size());
                    out.entrances.push_back(LocalEnd{comp, slot, ent[slot],
                                                     c.occurrence + "/" + leaf.exact_mdp().state(ent[slot]).name});
                    (slot < leaf.io().right_entrances.size() ? iface.r_entr : iface.l_entr)
                        .push_back(id);
                }
                for (uint32_t slot = 0; slot < exi.size(); ++slot) {
                    uint32_t id = static_cast<uint32_t>(out.exits.size());
                    out.exits.push_back(LocalEnd{comp, slot, exi[slot],
                                                 c.occurrence + "/" + leaf.exact_mdp().state(exi[slot]).name});
                    out.wiring.push_back(-1);
                    (slot < leaf.io().right_exits.size() ? iface.r_exit : iface.l_exit).push_back(id);
                }
                return iface;
            }
            case DiagramNode::Kind::Seq: {
                Interface l = build(*node.left);
                Interface r = build(*node.right);
                if (l.r_exit.size() != r.r_entr.size() || r.l_exit.size() != l.l_entr.size())
                    throw CompositionError("sequential composition middle arities differ");
                for (size_t i = 0; i < l.r_exit.size(); ++i)
                    out.wiring[l.r_exit[i]] = static_cast<int32_t>(r.r_entr[i]);
                for (size_t i = 0; i < r.l_exit.size(); ++i)
                    out.wiring[r.l_exit[i]] = static_cast<int32_t>(l.l_entr[i]);
                return Interface{l.r_entr, r.l_entr, r.r_exit, l.l_exit};
            }
            case DiagramNode::Kind::Sum: {
                Interface l = build(*node.left);
                Interface r = build(*node.right);
                auto cat = [](std::vector<uint32_t> a, const std::vector<uint32_t>& b) {
                    a.insert(a.end(), b.begin(), b.end());
                    return a;
                };
                return Interface{cat(l.r_entr, r.r_entr), cat(l.l_entr, r.l_entr),
                                 cat(l.r_exit, r.r_exit), cat(l.l_exit, r.l_exit)};
            }
        }
        throw ModelError("corrupt diagram node");
    }

    // Components carry left-to-right indices [base, base+count); the order
    // visits the right child first.
    void topo(const DiagramNode& node, uint32_t base) {
        if (node.kind == DiagramNode::Kind::Leaf) {
            out.topo_order.push_back(base);
            return;
        }
        uint32_t left_size = leaf_count(*node.left);
        topo(*node.right, base + left_size);
        topo(*node.left, base);
    }
};

}  // namespace

std::vector<ArityError> validate_arities(const StringDiagram& d) {
    std::vector<ArityError> errors;
    collect_arity_errors(d, d.root(), "", errors);
    return errors;
}

ComponentIndex index_diagram(const StringDiagram& d) {
    if (auto errors = validate_arities(d); !errors.empty())
        throw CompositionError(errors.front().str());

    IndexBuilder builder{d, {}, {}};
    Interface root = builder.build(d.root());
    builder.out.global_entrances = root.r_entr;
    builder.out.global_entrances.insert(builder.out.global_entrances.end(), root.l_entr.begin(),
                                        root.l_entr.end());
    builder.out.global_exits = root.r_exit;
    builder.out.global_exits.insert(builder.out.global_exits.end(), root.l_exit.begin(),
                                    root.l_exit.end());
    builder.topo(d.root(), 0);
    return std::move(builder.out);
}

namespace {

OpenMdp instantiate_leaf(const OpenMdp& leaf, const std::string& occurrence) {
    const auto& m = leaf.exact_mdp();
    Mdp<Rational> renamed;
    for (StateId s = 0; s < m.state_count(); ++s)
        renamed.add_state(occurrence + "/" + m.state(s).name);
    for (StateId s = 0; s < m.state_count(); ++s)
        for (const auto& action : m.state(s).actions) {
            auto& copy = renamed.add_action(s, action.label);
            copy.branches = action.branches;
        }
    return OpenMdp(std::move(renamed), leaf.io());
}

OpenMdp flatten_node(const StringDiagram& d, const DiagramNode& node,
                     OccurrenceCounter& occurrences) {
    switch (node.kind) {
        case DiagramNode::Kind::Leaf:
            return instantiate_leaf(d.leaf(node.leaf), occurrences.next(node.leaf));
        case DiagramNode::Kind::Seq: {
            OpenMdp left = flatten_node(d, *node.left, occurrences);
            OpenMdp right = flatten_node(d, *node.right, occurrences);
            return seq_compose(left, right);
        }
        case DiagramNode::Kind::Sum: {
            OpenMdp left = flatten_node(d, *node.left, occurrences);
            OpenMdp right = flatten_node(d, *node.right, occurrences);
            return sum_compose(left, right);
        }
    }
    throw ModelError("corrupt diagram node");
}

}  // namespace

OpenMdp flatten(const StringDiagram& d) {
    if (auto errors = validate_arities(d); !errors.empty())
        throw CompositionError(errors.front().str());
    OccurrenceCounter occurrences;
    return flatten_node(d, d.root(), occurrences);
}

}  // namespace compmdp
