#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "compmdp/diagram.hpp"
#include "compmdp/mdp.hpp"

namespace compmdp {

using PointQ = std::vector<Rational>;

/// A reachability vector realized by some scheduler from one entrance,
/// indexed by the component's exits (right then left).
struct AchievablePoint {
    PointQ coords;
    std::optional<DmScheduler> provenance;
};

/// Finitely generated under-approximation of the achievable set: the
/// downward convex closure of the generators, kept mutually non-dominated.
class ParetoUnder {
public:
    explicit ParetoUnder(uint32_t dim) : dim_(dim) {}

    /// sup over the represented set of w . p; attained at a generator, 0
    /// when there is none (the origin is always achievable).
    Rational read(const std::vector<Rational>& w) const;

    /// Returns false when the point is dominated by an existing generator
    /// (nothing changes); otherwise inserts and prunes newly dominated
    /// generators.
    bool insert(AchievablePoint point);

    const std::vector<AchievablePoint>& generators() const { return generators_; }
    uint32_t dim() const { return dim_; }

private:
    uint32_t dim_;
    std::vector<AchievablePoint> generators_;
};

struct Halfspace {
    std::vector<Rational> normal;  // nonnegative weight vector
    Rational bound;                // w . p <= bound
};

/// Downward-closed over-approximation: the unit box intersected with the
/// recorded halfspaces. A vertex set is maintained for up to three exits;
/// beyond that reads fall back to an exact LP.
class ParetoOver {
public:
    explicit ParetoOver(uint32_t dim);

    Rational read(const std::vector<Rational>& w) const;

    /// Returns false when the halfspace is redundant for the current
    /// polytope (dropped); duplicate inserts are no-ops.
    bool insert(Halfspace h);

    const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
    /// Present iff dim <= 3.
    const std::optional<std::vector<PointQ>>& vertices() const { return vertices_; }
    uint32_t dim() const { return dim_; }

    /// True iff p lies in the polytope, with absolute slack per halfspace.
    bool contains(const PointQ& p, const Rational& slack) const;

    /// Vertices of the polytope intersected with the probability simplex
    /// (sum of coordinates at most 1); achievable sets always lie inside
    /// the simplex, so the cut keeps the over-approximation sound while
    /// making every vertex substochastic. Only for dim <= 3.
    std::vector<PointQ> simplex_clipped_vertices() const;

private:
    void recompute_vertices();

    uint32_t dim_;
    std::vector<Halfspace> halfspaces_;
    std::optional<std::vector<PointQ>> vertices_;
};

/// Exact LP: maximize objective . x subject to rows[i].normal . x <=
/// rows[i].bound and 0 <= x <= 1. Bounds must be nonnegative so the origin
/// is feasible.
Rational maximize_over_halfspaces(const std::vector<Rational>& objective,
                                  const std::vector<Halfspace>& rows, uint32_t dim);

struct SoundApprox {
    ParetoUnder under;
    ParetoOver over;

    SoundApprox(uint32_t dim) : under(dim), over(dim) {}
};

struct CacheStats {
    uint64_t queries = 0;
    uint64_t hits = 0;
    double insert_seconds = 0;
    double retrieve_seconds = 0;
};

/// Per nominal leaf, per entrance: a sound approximation of the achievable
/// set, queried by weight and refined by (weight, verified upper, realized
/// point) updates. Entries start at (empty, unit box).
///
/// Single-writer, multi-reader: queries may run concurrently with each
/// other (statistics are guarded internally), updates need exclusive
/// access, which the engine provides by funnelling them through one
/// thread between query phases.
class ParetoCache {
public:
    void register_leaf(const std::string& leaf, uint32_t entrances, uint32_t exits);
    bool has_leaf(const std::string& leaf) const { return entries_.count(leaf) > 0; }

    struct ReadResult {
        bool hit = false;
        std::vector<Rational> lower;  // per entrance, meaningful on hit
    };
    /// Hit iff max over entrances of over(w) - under(w) <= eta; a hit
    /// returns the per-entrance under reads.
    ReadResult query(const std::string& leaf, const std::vector<Rational>& w,
                     const Rational& eta) const;

    /// Per entrance: insert the realized point into the under set and the
    /// halfspace {p | w.p <= upper[i]} into the over set. Throws
    /// SoundnessFault if a point escapes the over polytope by more than
    /// 1e-9 (an upstream bug, never data).
    void update(const std::string& leaf, const std::vector<Rational>& w,
                const std::vector<Rational>& upper, std::vector<AchievablePoint> points);

    const SoundApprox& approx(const std::string& leaf, uint32_t entrance) const;
    CacheStats stats() const;
    uint64_t point_count() const;
    uint64_t halfspace_count() const;

    nlohmann::json dump() const;
    /// Restores generators and halfspaces; leaves must be registered
    /// compatibly first.
    void load(const nlohmann::json& doc);

private:
    std::map<std::string, std::vector<SoundApprox>> entries_;
    mutable std::mutex stats_mutex_;
    mutable CacheStats stats_;
};

/// Upper bounds on the diagram's exact values obtained by composing the
/// per-leaf over-approximations along the wiring: each entrance of the
/// summary model offers one action per over-polytope vertex. The summary
/// is solved exactly when every vertex is substochastic, by backward
/// induction when the wiring is acyclic, and falls back to the trivial
/// bound 1 otherwise (all state values are at most max weight <= 1).
struct ComposeOverResult {
    enum class Status { Ok, Unsupported };
    Status status = Status::Ok;
    std::vector<Rational> upper;  // per global entrance, interface order
};
ComposeOverResult compose_over(const StringDiagram& d, const ComponentIndex& index,
                               const ParetoCache& cache, const std::vector<Rational>& w);

}  // namespace compmdp
