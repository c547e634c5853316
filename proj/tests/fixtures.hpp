#pragma once

// Shared model fixtures and seeded random generators for the test suites.

#include <random>

#include "compmdp/diagram.hpp"

namespace fixtures {

using namespace compmdp;

/// Component A of the two-component loop model: one right entrance, one
/// left entrance (loop return), one exit on each side, and a single real
/// choice at s1 between a 50/50 split toward the right exit and a sure
/// move to the left exit.
inline OpenMdp loop_pair_a() {
    Mdp<Rational> m;
    StateId enr = m.add_state("enr1");
    StateId s1 = m.add_state("s1");
    StateId s2 = m.add_state("s2");
    StateId exr = m.add_state("exr1");
    StateId exl = m.add_state("exl1");
    StateId enl = m.add_state("enl1");
    m.add_action(enr, "go").branches.push_back({s1, Rational(1)});
    auto& a = m.add_action(s1, "a");
    a.branches.push_back({exr, Rational(1, 2)});
    a.branches.push_back({s2, Rational(1, 2)});
    m.add_action(s1, "b").branches.push_back({s2, Rational(1)});
    m.add_action(s2, "go").branches.push_back({exl, Rational(1)});
    auto& back = m.add_action(enl, "go");
    back.branches.push_back({exr, Rational(7, 10)});
    back.branches.push_back({s2, Rational(3, 10)});
    return OpenMdp(std::move(m), OpenEnds{{enr}, {enl}, {exr}, {exl}});
}

/// Component B: from its right entrance, 0.7 to the right exit and 0.3 to
/// a detour that leaves through the left exit (feeding A's loop entrance).
inline OpenMdp loop_pair_b() {
    Mdp<Rational> m;
    StateId enr = m.add_state("benr1");
    StateId t1 = m.add_state("t1");
    StateId exr = m.add_state("bexr1");
    StateId exl = m.add_state("bexl1");
    auto& go = m.add_action(enr, "go");
    go.branches.push_back({t1, Rational(3, 10)});
    go.branches.push_back({exr, Rational(7, 10)});
    m.add_action(t1, "go").branches.push_back({exl, Rational(1)});
    return OpenMdp(std::move(m), OpenEnds{{enr}, {}, {exr}, {exl}});
}

/// A ; B with the loop through B's left exit. The maximum probability of
/// reaching the global right exit from the global entrance is 35/79.
inline StringDiagram loop_pair_diagram() {
    LeafTable leaves;
    leaves.emplace("A", loop_pair_a());
    leaves.emplace("B", loop_pair_b());
    return StringDiagram(make_seq(make_leaf("A"), make_leaf("B")), std::move(leaves));
}

inline const Rational loop_pair_value{35, 79};

/// Two-exit component whose two deterministic schedulers realize exactly
/// the points (0.2, 0.7) and (0.6, 0.2).
inline OpenMdp two_point_leaf() {
    Mdp<Rational> m;
    StateId i = m.add_state("i");
    StateId o1 = m.add_state("o1");
    StateId o2 = m.add_state("o2");
    StateId dead = m.add_state("dead");
    auto& a = m.add_action(i, "a");
    a.branches.push_back({o1, Rational(1, 5)});
    a.branches.push_back({o2, Rational(7, 10)});
    a.branches.push_back({dead, Rational(1, 10)});
    auto& b = m.add_action(i, "b");
    b.branches.push_back({o1, Rational(3, 5)});
    b.branches.push_back({o2, Rational(1, 5)});
    b.branches.push_back({dead, Rational(1, 5)});
    return OpenMdp(std::move(m), OpenEnds{{i}, {}, {o1, o2}, {}});
}

// ---------------------------------------------------------------------
// Seeded random generators
// ---------------------------------------------------------------------

struct RandomMdpOptions {
    uint32_t states = 8;
    uint32_t max_actions = 2;
    uint32_t max_branches = 3;
    uint32_t max_denominator = 8;
    uint32_t sink_count = 1;  // absorbing non-target states
};

/// Random MDP whose distributions use small denominators so every value
/// stays exactly representable.
inline Mdp<Rational> random_mdp(std::mt19937_64& rng, const RandomMdpOptions& opt = {}) {
    Mdp<Rational> m;
    for (uint32_t s = 0; s < opt.states; ++s) m.add_state("s" + std::to_string(s));
    auto rnd = [&](uint32_t bound) { return static_cast<uint32_t>(rng() % bound); };
    for (uint32_t s = 0; s + opt.sink_count < opt.states; ++s) {
        uint32_t n_actions = 1 + rnd(opt.max_actions);
        for (uint32_t a = 0; a < n_actions; ++a) {
            auto& action = m.add_action(s, "a" + std::to_string(a));
            uint32_t branches = 1 + rnd(opt.max_branches);
            uint32_t denom = 2 + rnd(opt.max_denominator - 1);
            // split denom into `branches` positive parts
            std::vector<uint32_t> cuts;
            if (branches > denom) branches = denom;
            while (cuts.size() + 1 < branches) {
                uint32_t c = 1 + rnd(denom - 1);
                bool dup = false;
                for (uint32_t x : cuts) dup = dup || x == c;
                if (!dup) cuts.push_back(c);
            }
            cuts.push_back(0);
            cuts.push_back(denom);
            std::sort(cuts.begin(), cuts.end());
            std::map<StateId, Rational> mass;
            for (size_t k = 0; k + 1 < cuts.size(); ++k)
                mass[rnd(opt.states)] += Rational(cuts[k + 1] - cuts[k], denom);
            for (const auto& [dst, p] : mass) action.branches.push_back({dst, p});
        }
    }
    return m;
}

struct RandomComponentOptions {
    uint32_t right_entrances = 1, left_entrances = 0;
    uint32_t right_exits = 1, left_exits = 0;
    uint32_t interior = 3;
    uint32_t max_actions = 2;
    uint32_t max_denominator = 8;
    std::string prefix;  // state-name prefix for direct composition
};

/// Random open MDP: entrances and interior states get random distributions
/// over interior, exits and a dead sink; exits are sinks.
inline OpenMdp random_component(std::mt19937_64& rng, const RandomComponentOptions& opt) {
    Mdp<Rational> m;
    OpenEnds io;
    auto rnd = [&](uint32_t bound) { return bound == 0 ? 0u : static_cast<uint32_t>(rng() % bound); };
    std::vector<StateId> sources, targets;
    for (uint32_t k = 0; k < opt.right_entrances; ++k)
        io.right_entrances.push_back(m.add_state(opt.prefix + "enr" + std::to_string(k)));
    for (uint32_t k = 0; k < opt.left_entrances; ++k)
        io.left_entrances.push_back(m.add_state(opt.prefix + "enl" + std::to_string(k)));
    for (uint32_t k = 0; k < opt.interior; ++k) m.add_state(opt.prefix + "q" + std::to_string(k));
    for (uint32_t k = 0; k < opt.right_exits; ++k)
        io.right_exits.push_back(m.add_state(opt.prefix + "exr" + std::to_string(k)));
    for (uint32_t k = 0; k < opt.left_exits; ++k)
        io.left_exits.push_back(m.add_state(opt.prefix + "exl" + std::to_string(k)));
    StateId dead = m.add_state(opt.prefix + "dead");

    for (StateId s = 0; s < m.state_count(); ++s) sources.push_back(s);
    for (StateId s = 0; s < m.state_count(); ++s) targets.push_back(s);

    for (StateId s = 0; s < m.state_count(); ++s) {
        bool is_exit = false;
        for (StateId x : io.right_exits) is_exit = is_exit || x == s;
        for (StateId x : io.left_exits) is_exit = is_exit || x == s;
        if (is_exit || s == dead) continue;
        uint32_t n_actions = 1 + rnd(opt.max_actions);
        for (uint32_t a = 0; a < n_actions; ++a) {
            auto& action = m.add_action(s, "a" + std::to_string(a));
            uint32_t denom = 2 + rnd(opt.max_denominator - 1);
            uint32_t branches = std::min(1 + rnd(3), denom);
            std::vector<uint32_t> cuts{0, denom};
            while (cuts.size() < branches + 1) {
                uint32_t c = 1 + rnd(denom - 1);
                if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
            }
            std::sort(cuts.begin(), cuts.end());
            std::map<StateId, Rational> mass;
            for (size_t k = 0; k + 1 < cuts.size(); ++k)
                mass[targets[rnd(static_cast<uint32_t>(targets.size()))]] +=
                    Rational(cuts[k + 1] - cuts[k], denom);
            for (const auto& [dst, p] : mass) action.branches.push_back({dst, p});
        }
    }
    return OpenMdp(std::move(m), std::move(io));
}

struct RandomDiagramOptions {
    uint32_t max_components = 4;
    uint32_t max_interior = 3;
    uint32_t max_ports = 2;   // per side
    bool allow_left = true;   // bidirectional wiring (loops)
    bool allow_sum = true;
    uint32_t max_actions = 2;
};

/// Random arity-consistent diagram: one or two sequential chains (summed
/// at the top when allowed), with leaves occasionally reused so caching
/// has duplicates to exploit. Components keep at most 2 exits in total so
/// every over-polytope stays in vertex form.
inline StringDiagram random_diagram(std::mt19937_64& rng, const RandomDiagramOptions& opt) {
    auto rnd = [&](uint32_t bound) { return bound == 0 ? 0u : static_cast<uint32_t>(rng() % bound); };
    LeafTable leaves;
    uint32_t leaf_counter = 0;

    // Interface between chain positions: (right entrances of the next
    // component, its left exits wiring back).
    struct Iface {
        uint32_t right_in, left_back;
    };
    auto make_chain = [&](uint32_t components) -> NodePtr {
        NodePtr node;
        Iface cur{1 + rnd(std::min(opt.max_ports, 2u)), opt.allow_left ? rnd(2) : 0};
        for (uint32_t k = 0; k < components; ++k) {
            bool last = k + 1 == components;
            std::string name;
            std::vector<std::string> fits;
            for (const auto& [n, leaf] : leaves) {
                Arity a = leaf.arity();
                if (a.right_in == cur.right_in && a.left_in == cur.left_back && a.left_out <= 1)
                    fits.push_back(n);
            }
            if (!fits.empty() && rnd(2) == 0) {
                name = fits[rnd(static_cast<uint32_t>(fits.size()))];
                Arity a = leaves.at(name).arity();
                cur = Iface{a.right_out, a.left_out};
            } else {
                // exits of this component = right exits + left exits <= 2
                uint32_t out_right = 1 + rnd(2 - cur.left_back);
                uint32_t back_in = (opt.allow_left && !last) ? rnd(2) : 0;
                name = "L" + std::to_string(leaf_counter++);
                RandomComponentOptions c;
                c.right_entrances = cur.right_in;
                c.left_exits = cur.left_back;
                c.right_exits = out_right;
                c.left_entrances = back_in;
                c.interior = 1 + rnd(opt.max_interior);
                c.max_actions = opt.max_actions;
                leaves.emplace(name, random_component(rng, c));
                cur = Iface{out_right, back_in};
            }
            NodePtr leaf_node = make_leaf(name);
            node = node ? make_seq(node, leaf_node) : leaf_node;
        }
        return node;
    };

    uint32_t total = 1 + rnd(opt.max_components);
    NodePtr root;
    if (opt.allow_sum && total >= 2 && rnd(3) == 0) {
        uint32_t first = 1 + rnd(total - 1);
        root = make_sum(make_chain(first), make_chain(total - first));
    } else {
        root = make_chain(total);
    }
    return StringDiagram(root, std::move(leaves));
}

/// Weight vector with small-denominator entries, at least one nonzero.
inline std::vector<Rational> random_weights(std::mt19937_64& rng, size_t n) {
    std::vector<Rational> w(n);
    bool nonzero = false;
    for (auto& x : w) {
        uint32_t num = static_cast<uint32_t>(rng() % 5);
        x = Rational(num, 4);
        nonzero = nonzero || num > 0;
    }
    if (!nonzero && n > 0) w[rng() % n] = 1;
    return w;
}

}  // namespace fixtures
