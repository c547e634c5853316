#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "compmdp/benchgen.hpp"
#include "compmdp/engine.hpp"
#include "compmdp/errors.hpp"

namespace {

using namespace compmdp;

constexpr int kExitConverged = 0;
constexpr int kExitInputError = 1;
constexpr int kExitBudget = 2;

struct AlgorithmChoice {
    bool mono = false;
    CacheKind cache = CacheKind::None;
    GscKind gsc = GscKind::Optimistic;
};

AlgorithmChoice pick_algorithm(const std::string& name) {
    if (name == "mono") return {true, CacheKind::None, GscKind::None};
    if (name == "cvi") return {false, CacheKind::None, GscKind::Optimistic};
    if (name == "ocvi-exact") return {false, CacheKind::Exact, GscKind::Optimistic};
    if (name == "ocvi-pareto") return {false, CacheKind::Pareto, GscKind::Optimistic};
    if (name == "symb") return {false, CacheKind::Pareto, GscKind::BottomUp};
    throw InputError("unknown algorithm '" + name + "'");
}

void print_table(std::ostream& os, const CviResult& result, const std::string& model,
                 const std::string& algorithm, double epsilon, uint32_t queried,
                 bool has_cache) {
    os << "model: " << model << "   algorithm: " << algorithm << "   epsilon: " << epsilon
       << "\n";
    os << std::left << std::setw(44) << "  entrance" << std::setw(16) << "lower"
       << std::setw(16) << "upper" << "\n";
    for (uint32_t pos = 0; pos < result.entrances.size(); ++pos) {
        const auto& e = result.entrances[pos];
        os << (pos == queried ? "* " : "  ") << std::left << std::setw(42) << e.name
           << std::setw(16) << std::setprecision(10) << e.lower;
        if (e.upper)
            os << std::setw(16) << *e.upper;
        else
            os << std::setw(16) << "-";
        os << "\n";
    }
    os << "converged: " << (result.converged ? "yes" : "no")
       << "   iterations: " << result.iterations << "   t: " << std::setprecision(4)
       << result.wall_seconds << "s   t_s: " << result.gsc_seconds << "s\n";
    if (has_cache)
        os << "cache: Q=" << result.cache_stats.queries << " H=" << result.cache_stats.hits
           << " t_i=" << result.cache_stats.insert_seconds
           << "s t_r=" << result.cache_stats.retrieve_seconds
           << "s |P|=" << result.cache_points << " halfspaces=" << result.cache_halfspaces
           << "\n";
    if (!result.note.empty()) os << "note: " << result.note << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compositional probabilistic model checking for open MDPs"};

    std::string model_path, bench_spec, algorithm = "symb";
    std::string output = "table", oracle = "off";
    std::string report_path, emit_model_path, cache_in, cache_out;
    std::string entrance_override, goal_override;
    CviConfig cfg;
    cfg.threads = 1;
    if (const char* env = std::getenv("COMPMDP_THREADS"))
        cfg.threads = static_cast<uint32_t>(std::max(1, std::atoi(env)));
    double time_cap = 0;
    uint64_t iteration_cap = cfg.iteration_cap;
    double epsilon = 0, eta = 0;

    app.add_option("--model", model_path, "model file (JSON)");
    app.add_option("--bench", bench_spec,
                   "benchmark spec, e.g. chains:10:dice2 or rooms:3:rms-safe-calm[:seed=7]");
    app.add_option("--algorithm", algorithm, "mono | cvi | ocvi-exact | ocvi-pareto | symb")
        ->capture_default_str();
    app.add_option("--epsilon", epsilon, "global precision (default: query epsilon or 1e-4)");
    app.add_option("--eta", eta, "local/cache precision (default epsilon/10)");
    app.add_option("--check-period", cfg.check_period, "iterations between stopping-criterion checks")
        ->capture_default_str();
    app.add_option("--cache-cutoff", cfg.cache_cutoff, "iteration after which the cache is bypassed")
        ->capture_default_str();
    app.add_option("--iteration-cap", iteration_cap, "engine iteration budget")
        ->capture_default_str();
    app.add_option("--time-cap", time_cap, "wall-clock budget in seconds (0 = unlimited)");
    app.add_option("--entrance", entrance_override, "query entrance (overrides the model file)");
    app.add_option("--goal", goal_override, "unit-weight goal exit (overrides the model file)");
    app.add_option("--output", output, "table | json")->capture_default_str();
    app.add_option("--report", report_path, "also write the JSON report to a file");
    app.add_option("--oracle", oracle, "off | exact-compare")->capture_default_str();
    app.add_option("--threads", cfg.threads, "worker cap (env COMPMDP_THREADS)")
        ->capture_default_str();
    app.add_option("--emit-model", emit_model_path, "write the (generated) model document and exit");
    app.add_option("--cache-in", cache_in, "warm-start Pareto cache from a dump");
    app.add_option("--cache-out", cache_out, "dump the Pareto cache after the run");

    CLI11_PARSE(app, argc, argv);

    try {
        if (model_path.empty() == bench_spec.empty())
            throw InputError("exactly one of --model / --bench is required");

        ModelDocument doc = model_path.empty() ? gen_diagram(parse_bench_spec(bench_spec))
                                               : load_model(model_path);
        const std::string model_name = model_path.empty() ? bench_spec : model_path;
        if (!emit_model_path.empty()) {
            save_model(doc, emit_model_path);
            std::cout << "model written to " << emit_model_path << "\n";
            return kExitConverged;
        }

        if (!entrance_override.empty()) doc.query.entrance = entrance_override;
        if (!goal_override.empty()) {
            doc.query.goal = goal_override;
            doc.query.weights.clear();
        }

        StringDiagram diagram = doc.build();
        if (auto errors = validate_arities(diagram); !errors.empty()) {
            for (const auto& e : errors) std::cerr << e.str() << "\n";
            return kExitInputError;
        }
        ComponentIndex index = index_diagram(diagram);
        ResolvedQuery query = resolve_query(doc.query, index);

        cfg.epsilon = epsilon > 0 ? epsilon : query.epsilon;
        cfg.eta = eta > 0 ? eta : cfg.epsilon / 10;
        cfg.iteration_cap = iteration_cap;
        cfg.time_cap_seconds = time_cap;

        AlgorithmChoice choice = pick_algorithm(algorithm);
        cfg.cache = choice.cache;
        cfg.gsc = choice.gsc;

        ParetoCache warm;
        if (!cache_in.empty() || !cache_out.empty()) {
            if (choice.cache != CacheKind::Pareto)
                throw InputError("--cache-in/--cache-out need a Pareto-cache algorithm");
            cfg.warm_cache = &warm;
            for (const auto& name : index.leaf_names) {
                const OpenMdp& leaf = diagram.leaf(name);
                warm.register_leaf(name, static_cast<uint32_t>(leaf.entrances().size()),
                                   static_cast<uint32_t>(leaf.exits().size()));
            }
            if (!cache_in.empty()) {
                std::ifstream in(cache_in);
                if (!in) throw InputError("cannot open cache file '" + cache_in + "'");
                nlohmann::json dump;
                in >> dump;
                warm.load(dump);
            }
        }

        CviResult result = choice.mono ? mono_run(diagram, query.weights, cfg)
                                       : cvi_run(diagram, query.weights, cfg);

        if (!cache_out.empty()) {
            std::ofstream out(cache_out);
            if (!out) throw InputError("cannot write cache file '" + cache_out + "'");
            out << warm.dump().dump(2) << "\n";
        }

        uint32_t queried_pos = 0;
        for (uint32_t pos = 0; pos < index.global_entrances.size(); ++pos)
            if (index.global_entrances[pos] == query.entrance) queried_pos = pos;

        nlohmann::json report = report_json(result, algorithm, model_name, cfg.epsilon);
        report["entrance"] = index.entrances[query.entrance].name;

        bool oracle_sound = true;
        if (oracle == "exact-compare") {
            std::vector<Rational> exact_values = exact_diagram_values(diagram, query.weights);
            nlohmann::json oracle_block = nlohmann::json::array();
            const Rational eps = exact(cfg.epsilon);
            for (uint32_t pos = 0; pos < exact_values.size(); ++pos) {
                const Rational lower = exact(result.entrances[pos].lower);
                bool ok = lower <= exact_values[pos];
                if (result.converged) ok = ok && exact_values[pos] <= lower + eps;
                oracle_sound = oracle_sound && ok;
                oracle_block.push_back(
                    {{"name", result.entrances[pos].name},
                     {"exact", to_fraction_string(exact_values[pos])},
                     {"exact_approx", to_double_down(exact_values[pos])},
                     {"sound", ok}});
            }
            report["oracle"] = {{"entrances", oracle_block}, {"sound", oracle_sound}};
        } else if (oracle != "off") {
            throw InputError("unknown oracle mode '" + oracle + "'");
        }

        int exit_code = result.converged ? kExitConverged : kExitBudget;
        if (!oracle_sound) exit_code = kExitInputError;
        report["exit_code"] = exit_code;

        if (output == "json") {
            std::cout << report.dump(2) << "\n";
        } else if (output == "table") {
            print_table(std::cout, result, model_name, algorithm, cfg.epsilon, queried_pos,
                        choice.cache != CacheKind::None);
            if (report.contains("oracle")) {
                for (const auto& row : report["oracle"]["entrances"])
                    std::cout << "oracle: " << row["name"].get<std::string>() << " exact="
                              << row["exact"].get<std::string>() << " (~"
                              << row["exact_approx"].get<double>() << ") sound="
                              << (row["sound"].get<bool>() ? "yes" : "NO") << "\n";
            }
        } else {
            throw InputError("unknown output mode '" + output + "'");
        }
        if (!report_path.empty()) {
            std::ofstream out(report_path);
            if (!out) throw InputError("cannot write report file '" + report_path + "'");
            out << report.dump(2) << "\n";
        }
        return exit_code;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const CompositionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}
