#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "compmdp/diagram.hpp"
#include "compmdp/model_format.hpp"
#include "compmdp/pareto.hpp"

namespace compmdp {

enum class GscKind { Optimistic, BottomUp, None };
enum class CacheKind { None, Exact, Pareto };

struct CviConfig {
    double epsilon = 1e-4;
    double eta = 1e-5;
    GscKind gsc = GscKind::Optimistic;
    CacheKind cache = CacheKind::Pareto;
    uint32_t check_period = 10;
    /// Iteration after which local solves bypass the cache and fall back to
    /// plain per-occurrence value iteration; keeps convergence.
    uint32_t cache_cutoff = 200;
    uint64_t iteration_cap = 100000;
    double time_cap_seconds = 0;  // 0 = unlimited
    uint32_t threads = 1;
    /// Warm-start cache (moved in); also receives updates during the run.
    ParetoCache* warm_cache = nullptr;

    void validate() const;
};

struct EntranceValue {
    std::string name;
    double lower = 0;
    std::optional<double> upper;
};

struct CviResult {
    std::vector<EntranceValue> entrances;  // global entrances, interface order
    bool converged = false;
    uint64_t iterations = 0;
    double wall_seconds = 0;
    double gsc_seconds = 0;
    int64_t gsc_accept_iteration = -1;
    CacheStats cache_stats;
    uint64_t cache_points = 0;
    uint64_t cache_halfspaces = 0;
    std::string note;
    std::vector<double> local_lower;  // g over all local entrances (diagnostics)
};

/// Compositional value iteration: local solves per component alternate
/// with value propagation along the wiring until a global stopping
/// criterion certifies the epsilon bound (or a budget runs out, which
/// returns the last sound lower bounds with converged=false).
CviResult cvi_run(const StringDiagram& d, const std::vector<Rational>& w, const CviConfig& cfg);

/// Baseline: flatten the diagram and run optimistic value iteration on the
/// complete MDP.
CviResult mono_run(const StringDiagram& d, const std::vector<Rational>& w, const CviConfig& cfg);

/// h from g: global exits keep their query weight, wired exits copy their
/// partner entrance's value.
std::vector<double> propagate(const ComponentIndex& index, const std::vector<double>& g,
                              const std::vector<double>& w_global);

/// One application of the summary-level Bellman operator: for every local
/// entrance, the exact optimum of its component under exit weights read
/// off the candidate (wired exits) and the query weight (global exits).
std::vector<Rational> shortcut_bellman_apply(const StringDiagram& d, const ComponentIndex& index,
                                             const std::vector<Rational>& candidate,
                                             const std::vector<Rational>& w);

/// Optimistic stopping criterion: certifies u := min(1, g + eps) whenever
/// it passes the exact summary-level Park check. Returns u (per local
/// entrance) on acceptance.
std::optional<std::vector<Rational>> opt_gsc_check(const StringDiagram& d,
                                                   const ComponentIndex& index,
                                                   const std::vector<double>& g,
                                                   const std::vector<Rational>& w, double epsilon);

struct BuGscOutcome {
    enum class Status { Accept, NotYet, Unsupported };
    Status status = Status::NotYet;
    std::vector<Rational> upper;  // per global entrance when not Unsupported
};
/// Bottom-up stopping criterion: compose the cached over-approximations,
/// accept when the composed bound is within eps of g at every global
/// entrance.
BuGscOutcome bu_gsc_check(const StringDiagram& d, const ComponentIndex& index,
                          const ParetoCache& cache, const std::vector<Rational>& w,
                          const std::vector<double>& g, double epsilon);

/// Exact per-global-entrance values of the flattened diagram (oracle mode).
std::vector<Rational> exact_diagram_values(const StringDiagram& d, const std::vector<Rational>& w);

nlohmann::json report_json(const CviResult& result, const std::string& algorithm,
                           const std::string& model_name, double epsilon);

}  // namespace compmdp
