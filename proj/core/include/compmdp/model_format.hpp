#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "compmdp/diagram.hpp"

namespace compmdp {

/// Query block of a model file: entrance, weight per global exit (or a
/// goal state name resolved to a unit weight), and the precision.
struct Query {
    std::string entrance;  // empty = first global entrance
    std::map<std::string, Rational> weights;
    std::optional<std::string> goal;
    double epsilon = 1e-4;
};

struct ModelDocument {
    LeafTable leaves;
    NodePtr diagram;
    Query query;
    std::string metadata_json;  // free-form block, kept verbatim

    StringDiagram build() const { return StringDiagram(diagram, leaves); }
};

ModelDocument parse_model(const nlohmann::json& doc);
ModelDocument load_model(const std::filesystem::path& path);
nlohmann::json model_to_json(const ModelDocument& doc);
void save_model(const ModelDocument& doc, const std::filesystem::path& path);

/// Resolves the query against a diagram: weight vector over global exits
/// (interface order) and the entrance end id. Open-end names may be given
/// in full ("A@0/exit1") or as a state name that is unique among the
/// global ends. Throws InputError naming any missing or unknown exit.
struct ResolvedQuery {
    std::vector<Rational> weights;  // per global exit
    uint32_t entrance;              // global entrance id
    double epsilon;
};
ResolvedQuery resolve_query(const Query& query, const ComponentIndex& index);

}  // namespace compmdp
