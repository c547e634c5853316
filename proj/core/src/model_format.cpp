#include "compmdp/model_format.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "compmdp/errors.hpp"

namespace compmdp {

using nlohmann::json;

namespace {

Rational probability_from_json(const json& j, const std::string& where) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number_float()) return exact(j.get<double>());
    throw InputError("probability at " + where + " must be a string or number");
}

std::vector<StateId> io_list(const json& io, const char* key, const Mdp<Rational>& mdp,
                             const std::string& leaf) {
    std::vector<StateId> out;
    if (!io.contains(key)) return out;
    for (const auto& name : io.at(key)) {
        auto id = mdp.find_state(name.get<std::string>());
        if (!id)
            throw InputError("leaves." + leaf + ".io." + key + " names unknown state '" +
                             name.get<std::string>() + "'");
        out.push_back(*id);
    }
    return out;
}

OpenMdp parse_leaf(const std::string& name, const json& body) {
    const std::string where = "leaves." + name;
    if (!body.contains("states")) throw InputError(where + ".states missing");
    Mdp<Rational> mdp;
    for (const auto& s : body.at("states")) mdp.add_state(s.get<std::string>());
    if (body.contains("transitions")) {
        size_t row = 0;
        for (const auto& t : body.at("transitions")) {
            const std::string at = where + ".transitions[" + std::to_string(row++) + "]";
            if (!t.is_array() || t.size() != 3)
                throw InputError(at + " must be [src, action, branches]");
            auto src = mdp.find_state(t.at(0).get<std::string>());
            if (!src) throw InputError(at + " names unknown state '" + t.at(0).get<std::string>() + "'");
            auto& action = mdp.add_action(*src, t.at(1).get<std::string>());
            for (const auto& branch : t.at(2)) {
                if (!branch.is_array() || branch.size() != 2)
                    throw InputError(at + " branch must be [dst, prob]");
                auto dst = mdp.find_state(branch.at(0).get<std::string>());
                if (!dst)
                    throw InputError(at + " names unknown state '" + branch.at(0).get<std::string>() + "'");
                action.branches.push_back({*dst, probability_from_json(branch.at(1), at)});
            }
        }
    }
    json io = body.value("io", json::object());
    OpenEnds ends{io_list(io, "right_entrances", mdp, name), io_list(io, "left_entrances", mdp, name),
                  io_list(io, "right_exits", mdp, name), io_list(io, "left_exits", mdp, name)};
    try {
        return OpenMdp(std::move(mdp), std::move(ends));
    } catch (const ModelError& e) {
        throw InputError(where + ": " + e.what());
    }
}

NodePtr parse_node(const json& j, const std::string& where) {
    if (!j.is_object() || j.size() != 1)
        throw InputError("diagram node at " + where + " must be {leaf|seq|sum: ...}");
    if (j.contains("leaf")) return make_leaf(j.at("leaf").get<std::string>());
    const bool is_seq = j.contains("seq");
    if (!is_seq && !j.contains("sum"))
        throw InputError("diagram node at " + where + " must be {leaf|seq|sum: ...}");
    const json& kids = is_seq ? j.at("seq") : j.at("sum");
    if (!kids.is_array() || kids.size() < 2)
        throw InputError("diagram node at " + where + " needs at least two children");
    // n-ary lists fold left-associatively into binary nodes
    NodePtr acc = parse_node(kids.at(0), where + "[0]");
    for (size_t i = 1; i < kids.size(); ++i) {
        NodePtr next = parse_node(kids.at(i), where + "[" + std::to_string(i) + "]");
        acc = is_seq ? make_seq(acc, next) : make_sum(acc, next);
    }
    return acc;
}

json node_to_json(const DiagramNode& node) {
    switch (node.kind) {
        case DiagramNode::Kind::Leaf:
            return json{{"leaf", node.leaf}};
        case DiagramNode::Kind::Seq:
            return json{{"seq", json::array({node_to_json(*node.left), node_to_json(*node.right)})}};
        case DiagramNode::Kind::Sum:
            return json{{"sum", json::array({node_to_json(*node.left), node_to_json(*node.right)})}};
    }
    throw ModelError("corrupt diagram node");
}

}  // namespace

ModelDocument parse_model(const json& doc) {
    ModelDocument out;
    if (!doc.contains("leaves") || !doc.at("leaves").is_object())
        throw InputError("model document needs a 'leaves' object");
    for (const auto& [name, body] : doc.at("leaves").items())
        out.leaves.emplace(name, parse_leaf(name, body));
    if (!doc.contains("diagram")) throw InputError("model document needs a 'diagram'");
    out.diagram = parse_node(doc.at("diagram"), "diagram");
    if (doc.contains("query")) {
        const json& q = doc.at("query");
        out.query.entrance = q.value("entrance", std::string{});
        if (q.contains("goal")) out.query.goal = q.at("goal").get<std::string>();
        if (q.contains("weights"))
            for (const auto& [exit, w] : q.at("weights").items())
                out.query.weights.emplace(exit, probability_from_json(w, "query.weights." + exit));
        out.query.epsilon = q.value("epsilon", 1e-4);
    }
    if (doc.contains("metadata")) out.metadata_json = doc.at("metadata").dump();
    return out;
}

ModelDocument load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw InputError("model file '" + path.string() + "': " + e.what());
    }
    return parse_model(doc);
}

json model_to_json(const ModelDocument& doc) {
    json leaves = json::object();
    for (const auto& [name, leaf] : doc.leaves) {
        const auto& mdp = leaf.exact_mdp();
        json states = json::array(), transitions = json::array(), actions = json::array();
        std::vector<std::string> action_labels;
        for (StateId s = 0; s < mdp.state_count(); ++s) {
            states.push_back(mdp.state(s).name);
            for (const auto& action : mdp.state(s).actions) {
                json branches = json::array();
                for (const auto& branch : action.branches)
                    branches.push_back(json::array(
                        {mdp.state(branch.dst).name, to_fraction_string(branch.prob)}));
                transitions.push_back(json::array({mdp.state(s).name, action.label, branches}));
                if (std::find(action_labels.begin(), action_labels.end(), action.label) ==
                    action_labels.end())
                    action_labels.push_back(action.label);
            }
        }
        for (const auto& label : action_labels) actions.push_back(label);
        auto names = [&](const std::vector<StateId>& ids) {
            json arr = json::array();
            for (StateId s : ids) arr.push_back(mdp.state(s).name);
            return arr;
        };
        leaves[name] = json{{"states", states},
                            {"actions", actions},
                            {"transitions", transitions},
                            {"io",
                             {{"right_entrances", names(leaf.io().right_entrances)},
                              {"left_entrances", names(leaf.io().left_entrances)},
                              {"right_exits", names(leaf.io().right_exits)},
                              {"left_exits", names(leaf.io().left_exits)}}}};
    }
    json query{{"epsilon", doc.query.epsilon}};
    if (!doc.query.entrance.empty()) query["entrance"] = doc.query.entrance;
    if (doc.query.goal) query["goal"] = *doc.query.goal;
    if (!doc.query.weights.empty()) {
        json weights = json::object();
        for (const auto& [exit, w] : doc.query.weights) weights[exit] = to_fraction_string(w);
        query["weights"] = weights;
    }
    json out{{"leaves", leaves}, {"diagram", node_to_json(*doc.diagram)}, {"query", query}};
    if (!doc.metadata_json.empty()) out["metadata"] = json::parse(doc.metadata_json);
    return out;
}

void save_model(const ModelDocument& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write model file '" + path.string() + "'");
    out << model_to_json(doc).dump(2) << "\n";
}

ResolvedQuery resolve_query(const Query& query, const ComponentIndex& index) {
    ResolvedQuery out;
    out.epsilon = query.epsilon;

    auto match_end = [&](const std::vector<uint32_t>& ids, const std::vector<LocalEnd>& ends,
                         const std::string& name, const char* what) -> uint32_t {
        std::vector<uint32_t> hits;
        for (uint32_t pos = 0; pos < ids.size(); ++pos) {
            const LocalEnd& end = ends[ids[pos]];
            if (end.name == name) return pos;
            auto slash = end.name.find('/');
            if (slash != std::string::npos && end.name.substr(slash + 1) == name) hits.push_back(pos);
        }
        if (hits.size() == 1) return hits.front();
        if (hits.empty())
            throw InputError(std::string(what) + " '" + name + "' does not name a global " + what);
        throw InputError(std::string(what) + " '" + name + "' is ambiguous; use the full occurrence path");
    };

    out.weights.assign(index.global_exits.size(), Rational(0));
    if (query.goal) {
        uint32_t pos = match_end(index.global_exits, index.exits, *query.goal, "exit");
        out.weights[pos] = 1;
    } else {
        std::vector<int8_t> assigned(index.global_exits.size(), 0);
        for (const auto& [name, w] : query.weights) {
            uint32_t pos = match_end(index.global_exits, index.exits, name, "exit");
            out.weights[pos] = w;
            assigned[pos] = 1;
        }
        for (uint32_t pos = 0; pos < assigned.size(); ++pos)
            if (!assigned[pos])
                throw InputError("query.weights has no entry for global exit '" +
                                 index.exits[index.global_exits[pos]].name + "'");
    }

    if (index.global_entrances.empty()) throw InputError("diagram has no global entrance");
    uint32_t entrance_pos = 0;
    if (!query.entrance.empty())
        entrance_pos = match_end(index.global_entrances, index.entrances, query.entrance, "entrance");
    out.entrance = index.global_entrances[entrance_pos];
    return out;
}

}  // namespace compmdp
