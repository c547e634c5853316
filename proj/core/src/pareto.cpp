#include "compmdp/pareto.hpp"

#include <algorithm>
#include <chrono>
#include <functional>

#include <nlohmann/json.hpp>

#include "compmdp/errors.hpp"
#include "compmdp/exact.hpp"

namespace compmdp {

namespace {

Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    Rational acc;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

bool dominates(const PointQ& a, const PointQ& b) {
    // a >= b coordinatewise
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] < b[i]) return false;
    return true;
}

const Rational kGeometrySlack = Rational(1, 1000000000);  // 1e-9

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Rational ParetoUnder::read(const std::vector<Rational>& w) const {
    if (w.size() != dim_) throw ModelError("weight dimension mismatch in cache read");
    Rational best;  // 0: the origin is achievable by any scheduler
    for (const auto& g : generators_) best = std::max(best, dot(w, g.coords));
    return best;
}

bool ParetoUnder::insert(AchievablePoint point) {
    if (point.coords.size() != dim_) throw ModelError("point dimension mismatch");
    Rational sum;
    for (const auto& c : point.coords) {
        if (c < 0 || c > 1) throw ModelError("achievable point coordinate outside [0,1]");
        sum += c;
    }
    if (sum > 1 + kGeometrySlack) throw ModelError("achievable point coordinates sum above 1");
    for (const auto& g : generators_)
        if (dominates(g.coords, point.coords)) return false;
    std::erase_if(generators_, [&](const AchievablePoint& g) {
        return dominates(point.coords, g.coords);
    });
    generators_.push_back(std::move(point));
    return true;
}

ParetoOver::ParetoOver(uint32_t dim) : dim_(dim) {
    if (dim_ <= 3) recompute_vertices();
}

bool ParetoOver::contains(const PointQ& p, const Rational& slack) const {
    for (const auto& h : halfspaces_)
        if (dot(h.normal, p) > h.bound + slack) return false;
    for (const auto& c : p)
        if (c < -slack || c > 1 + slack) return false;
    return true;
}

Rational ParetoOver::read(const std::vector<Rational>& w) const {
    if (w.size() != dim_) throw ModelError("weight dimension mismatch in cache read");
    if (vertices_) {
        Rational best;
        for (const auto& v : *vertices_) best = std::max(best, dot(w, v));
        return best;
    }
    try {
        return maximize_over_halfspaces(w, halfspaces_, dim_);
    } catch (const std::exception&) {
        // Degrade to the box bound; callers treat the loose value as a miss.
        Rational sum;
        for (const auto& wi : w) sum += wi;
        return sum;
    }
}

bool ParetoOver::insert(Halfspace h) {
    if (h.normal.size() != dim_) throw ModelError("halfspace dimension mismatch");
    if (h.bound < 0) throw ModelError("halfspace bound below 0");
    for (const auto& existing : halfspaces_)
        if (existing.normal == h.normal && existing.bound == h.bound) return false;
    if (vertices_) {
        // Redundant cut: no vertex beyond the plane.
        bool cuts = false;
        for (const auto& v : *vertices_)
            if (dot(h.normal, v) > h.bound) { cuts = true; break; }
        if (!cuts) return false;
    }
    halfspaces_.push_back(std::move(h));
    if (dim_ <= 3) {
        recompute_vertices();
        // Drop halfspaces that no longer support the polytope.
        std::erase_if(halfspaces_, [&](const Halfspace& hs) {
            for (const auto& v : *vertices_)
                if (dot(hs.normal, v) == hs.bound) return false;
            return true;
        });
    }
    return true;
}

namespace {

/// Vertices of the bounded polytope cut out by the constraint rows: every
/// feasible solution of a full-rank subset of active constraints.
std::vector<PointQ> enumerate_vertices(const std::vector<Halfspace>& rows, uint32_t dim) {
    std::vector<PointQ> vertices;
    if (dim == 0) {
        vertices.push_back({});
        return vertices;
    }
    const size_t m = rows.size();
    std::vector<size_t> pick(dim);
    auto solve_subset = [&]() {
        std::vector<std::vector<Rational>> a(dim, std::vector<Rational>(dim));
        std::vector<Rational> b(dim);
        for (uint32_t r = 0; r < dim; ++r) {
            a[r] = rows[pick[r]].normal;
            b[r] = rows[pick[r]].bound;
        }
        PointQ x(dim);
        for (uint32_t col = 0; col < dim; ++col) {
            uint32_t pivot = col;
            while (pivot < dim && a[pivot][col] == 0) ++pivot;
            if (pivot == dim) return;  // singular subset
            std::swap(a[col], a[pivot]);
            std::swap(b[col], b[pivot]);
            for (uint32_t r = col + 1; r < dim; ++r) {
                if (a[r][col] == 0) continue;
                Rational f = a[r][col] / a[col][col];
                for (uint32_t c = col; c < dim; ++c) a[r][c] -= f * a[col][c];
                b[r] -= f * b[col];
            }
        }
        for (int col = static_cast<int>(dim) - 1; col >= 0; --col) {
            Rational acc = b[col];
            for (uint32_t c = col + 1; c < dim; ++c) acc -= a[col][c] * x[c];
            x[col] = acc / a[col][col];
        }
        for (const auto& row : rows)
            if (dot(row.normal, x) > row.bound) return;
        if (std::find(vertices.begin(), vertices.end(), x) == vertices.end())
            vertices.push_back(std::move(x));
    };
    auto recurse = [&](auto&& self, size_t start, uint32_t depth) -> void {
        if (depth == dim) {
            solve_subset();
            return;
        }
        for (size_t i = start; i + (dim - depth - 1) < m; ++i) {
            pick[depth] = i;
            self(self, i + 1, depth + 1);
        }
    };
    recurse(recurse, 0, 0);
    return vertices;
}

std::vector<Halfspace> with_box(const std::vector<Halfspace>& halfspaces, uint32_t dim) {
    std::vector<Halfspace> rows = halfspaces;
    for (uint32_t i = 0; i < dim; ++i) {
        std::vector<Rational> up(dim), down(dim);
        up[i] = 1;
        down[i] = -1;
        rows.push_back({up, Rational(1)});
        rows.push_back({down, Rational(0)});
    }
    return rows;
}

}  // namespace

void ParetoOver::recompute_vertices() {
    vertices_ = enumerate_vertices(with_box(halfspaces_, dim_), dim_);
}

std::vector<PointQ> ParetoOver::simplex_clipped_vertices() const {
    if (dim_ > 3) throw ModelError("vertex form unavailable beyond 3 exits");
    std::vector<Halfspace> rows = with_box(halfspaces_, dim_);
    rows.push_back({std::vector<Rational>(dim_, Rational(1)), Rational(1)});
    return enumerate_vertices(rows, dim_);
}

Rational maximize_over_halfspaces(const std::vector<Rational>& objective,
                                  const std::vector<Halfspace>& rows, uint32_t dim) {
    // Simplex on: max c.x, A x <= b, 0 <= x <= 1, with b >= 0 so the slack
    // basis is feasible. Bland's rule keeps it finite.
    const size_t m = rows.size() + dim;  // halfspaces + upper box rows
    const size_t n = dim;
    std::vector<std::vector<Rational>> t(m + 1, std::vector<Rational>(n + m + 1));
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].bound < 0) throw ModelError("LP bound below 0");
        for (size_t j = 0; j < n; ++j) t[i][j] = rows[i].normal[j];
        t[i][n + i] = 1;
        t[i][n + m] = rows[i].bound;
    }
    for (size_t i = 0; i < dim; ++i) {
        size_t r = rows.size() + i;
        t[r][i] = 1;
        t[r][n + r] = 1;
        t[r][n + m] = 1;
    }
    for (size_t j = 0; j < n; ++j) t[m][j] = -objective[j];

    std::vector<size_t> basis(m);
    for (size_t i = 0; i < m; ++i) basis[i] = n + i;

    for (;;) {
        size_t entering = n + m;
        for (size_t j = 0; j < n + m; ++j)
            if (t[m][j] < 0) { entering = j; break; }  // Bland: smallest index
        if (entering == n + m) break;

        size_t leaving = m;
        Rational best_ratio;
        for (size_t i = 0; i < m; ++i) {
            if (t[i][entering] <= 0) continue;
            Rational ratio = t[i][n + m] / t[i][entering];
            if (leaving == m || ratio < best_ratio ||
                (ratio == best_ratio && basis[i] < basis[leaving])) {
                best_ratio = ratio;
                leaving = i;
            }
        }
        if (leaving == m) throw ModelError("LP unbounded");  // impossible inside the box

        Rational pivot = t[leaving][entering];
        for (auto& v : t[leaving]) v /= pivot;
        for (size_t i = 0; i <= m; ++i) {
            if (i == leaving || t[i][entering] == 0) continue;
            Rational f = t[i][entering];
            for (size_t j = 0; j <= n + m; ++j) t[i][j] -= f * t[leaving][j];
        }
        basis[leaving] = entering;
    }
    return t[m][n + m];
}

void ParetoCache::register_leaf(const std::string& leaf, uint32_t entrances, uint32_t exits) {
    if (entries_.count(leaf)) return;
    std::vector<SoundApprox> per_entrance;
    per_entrance.reserve(entrances);
    for (uint32_t i = 0; i < entrances; ++i) per_entrance.emplace_back(exits);
    entries_.emplace(leaf, std::move(per_entrance));
}

ParetoCache::ReadResult ParetoCache::query(const std::string& leaf, const std::vector<Rational>& w,
                                           const Rational& eta) const {
    auto start = std::chrono::steady_clock::now();
    auto it = entries_.find(leaf);
    if (it == entries_.end()) throw ModelError("cache query for unregistered leaf '" + leaf + "'");

    ReadResult result;
    result.hit = true;
    result.lower.reserve(it->second.size());
    for (const auto& approx : it->second) {
        Rational lo = approx.under.read(w);
        Rational hi = approx.over.read(w);
        if (hi - lo > eta) result.hit = false;
        result.lower.push_back(std::move(lo));
    }
    {
        std::lock_guard<std::mutex> lock(stats_mutex_);
        ++stats_.queries;
        if (result.hit) ++stats_.hits;
        stats_.retrieve_seconds += seconds_since(start);
    }
    return result;
}

void ParetoCache::update(const std::string& leaf, const std::vector<Rational>& w,
                         const std::vector<Rational>& upper,
                         std::vector<AchievablePoint> points) {
    auto start = std::chrono::steady_clock::now();
    auto it = entries_.find(leaf);
    if (it == entries_.end()) throw ModelError("cache update for unregistered leaf '" + leaf + "'");
    auto& per_entrance = it->second;
    if (upper.size() != per_entrance.size() || points.size() != per_entrance.size())
        throw ModelError("cache update arity mismatch for leaf '" + leaf + "'");

    for (size_t i = 0; i < per_entrance.size(); ++i) {
        auto& approx = per_entrance[i];
        if (!approx.over.contains(points[i].coords, kGeometrySlack))
            throw SoundnessFault("achievable point escapes the over-approximation of leaf '" +
                                 leaf + "'");
        if (approx.under.read(w) > upper[i] + kGeometrySlack)
            throw SoundnessFault("upper bound cuts below the under-approximation of leaf '" +
                                 leaf + "'");
        approx.under.insert(std::move(points[i]));
        approx.over.insert(Halfspace{w, upper[i]});
    }
    std::lock_guard<std::mutex> lock(stats_mutex_);
    stats_.insert_seconds += seconds_since(start);
}

CacheStats ParetoCache::stats() const {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    return stats_;
}

const SoundApprox& ParetoCache::approx(const std::string& leaf, uint32_t entrance) const {
    return entries_.at(leaf).at(entrance);
}

uint64_t ParetoCache::point_count() const {
    uint64_t n = 0;
    for (const auto& [leaf, per_entrance] : entries_)
        for (const auto& approx : per_entrance) n += approx.under.generators().size();
    return n;
}

uint64_t ParetoCache::halfspace_count() const {
    uint64_t n = 0;
    for (const auto& [leaf, per_entrance] : entries_)
        for (const auto& approx : per_entrance) n += approx.over.halfspaces().size();
    return n;
}

nlohmann::json ParetoCache::dump() const {
    using nlohmann::json;
    json leaves = json::object();
    for (const auto& [leaf, per_entrance] : entries_) {
        json entrances = json::array();
        for (const auto& approx : per_entrance) {
            json generators = json::array(), halfspaces = json::array();
            for (const auto& g : approx.under.generators()) {
                json coords = json::array();
                for (const auto& c : g.coords) coords.push_back(to_fraction_string(c));
                generators.push_back(coords);
            }
            for (const auto& h : approx.over.halfspaces()) {
                json normal = json::array();
                for (const auto& c : h.normal) normal.push_back(to_fraction_string(c));
                halfspaces.push_back(json{{"w", normal}, {"u", to_fraction_string(h.bound)}});
            }
            entrances.push_back(json{{"generators", generators}, {"halfspaces", halfspaces}});
        }
        leaves[leaf] = entrances;
    }
    return nlohmann::json{{"schema_version", 1}, {"leaves", leaves}};
}

void ParetoCache::load(const nlohmann::json& doc) {
    for (const auto& [leaf, entrances] : doc.at("leaves").items()) {
        auto it = entries_.find(leaf);
        if (it == entries_.end()) continue;  // unused leaf, skip silently
        if (entrances.size() != it->second.size())
            throw InputError("cache file entrance count mismatch for leaf '" + leaf + "'");
        for (size_t i = 0; i < entrances.size(); ++i) {
            auto& approx = it->second[i];
            for (const auto& coords : entrances.at(i).at("generators")) {
                PointQ p;
                for (const auto& c : coords) p.push_back(parse_rational(c.get<std::string>()));
                approx.under.insert(AchievablePoint{std::move(p), std::nullopt});
            }
            for (const auto& h : entrances.at(i).at("halfspaces")) {
                Halfspace hs;
                for (const auto& c : h.at("w")) hs.normal.push_back(parse_rational(c.get<std::string>()));
                hs.bound = parse_rational(h.at("u").get<std::string>());
                approx.over.insert(std::move(hs));
            }
        }
    }
}

namespace {

struct OverVertexTable {
    // vertices per (component, entrance slot), resolved through the cache
    std::vector<std::vector<const std::vector<PointQ>*>> per_component;
    bool all_substochastic = true;
};

OverVertexTable gather_vertices(const ComponentIndex& index, const ParetoCache& cache) {
    OverVertexTable table;
    table.per_component.resize(index.components.size());
    for (uint32_t c = 0; c < index.components.size(); ++c) {
        const Component& comp = index.components[c];
        table.per_component[c].resize(comp.n_entrances);
        for (uint32_t slot = 0; slot < comp.n_entrances; ++slot) {
            const auto& approx = cache.approx(comp.leaf, slot);
            if (!approx.over.vertices())
                throw ModelError("over-approximation vertices unavailable");
            const auto& verts = *approx.over.vertices();
            table.per_component[c][slot] = &verts;
            for (const auto& v : verts) {
                Rational sum;
                for (const auto& x : v) sum += x;
                if (sum > 1) table.all_substochastic = false;
            }
        }
    }
    return table;
}

/// Like gather_vertices but with every polytope cut to the probability
/// simplex, which forces substochastic vertices. Storage owns the cuts.
std::vector<std::vector<std::vector<PointQ>>> gather_clipped_vertices(
    const ComponentIndex& index, const ParetoCache& cache) {
    std::vector<std::vector<std::vector<PointQ>>> per_component(index.components.size());
    std::map<std::pair<std::string, uint32_t>, std::vector<PointQ>> memo;
    for (uint32_t c = 0; c < index.components.size(); ++c) {
        const Component& comp = index.components[c];
        per_component[c].resize(comp.n_entrances);
        for (uint32_t slot = 0; slot < comp.n_entrances; ++slot) {
            auto key = std::make_pair(comp.leaf, slot);
            auto it = memo.find(key);
            if (it == memo.end())
                it = memo.emplace(key, cache.approx(comp.leaf, slot).over.simplex_clipped_vertices())
                         .first;
            per_component[c][slot] = it->second;
        }
    }
    return per_component;
}

}  // namespace

namespace {

/// Exact solve of the summary MDP whose entrance actions are the given
/// (substochastic) vertex sets.
std::vector<Rational> solve_vertex_summary(
    const ComponentIndex& index, const std::vector<Rational>& w,
    const std::function<const std::vector<PointQ>&(uint32_t, uint32_t)>& vertices_of) {
    Mdp<Rational> summary;
    std::vector<StateId> entrance_state(index.entrances.size()), exit_state(index.exits.size());
    for (uint32_t e = 0; e < index.entrances.size(); ++e)
        entrance_state[e] = summary.add_state("en#" + std::to_string(e));
    for (uint32_t x = 0; x < index.exits.size(); ++x)
        exit_state[x] = summary.add_state("ex#" + std::to_string(x));
    StateId star = summary.add_state("star");

    for (uint32_t c = 0; c < index.components.size(); ++c) {
        const Component& comp = index.components[c];
        for (uint32_t slot = 0; slot < comp.n_entrances; ++slot) {
            uint32_t e = index.entrance_id(c, slot);
            const auto& verts = vertices_of(c, slot);
            for (size_t k = 0; k < verts.size(); ++k) {
                auto& action = summary.add_action(entrance_state[e], "v" + std::to_string(k));
                Rational residual(1);
                for (uint32_t j = 0; j < comp.n_exits; ++j) {
                    if (verts[k][j] == 0) continue;
                    action.branches.push_back({exit_state[index.exit_id(c, j)], verts[k][j]});
                    residual -= verts[k][j];
                }
                if (residual > 0) action.branches.push_back({star, residual});
            }
        }
    }
    for (uint32_t x = 0; x < index.exits.size(); ++x) {
        if (index.wiring[x] >= 0) {
            auto& action = summary.add_action(exit_state[x], "wire");
            action.branches.push_back(
                {entrance_state[static_cast<uint32_t>(index.wiring[x])], Rational(1)});
        }
    }
    TargetWeight<Rational> tw;
    for (uint32_t pos = 0; pos < index.global_exits.size(); ++pos) {
        tw.targets.push_back(exit_state[index.global_exits[pos]]);
        tw.weights.push_back(w[pos]);
    }
    ExactSolution solution = policy_iteration_exact(summary, tw);
    std::vector<Rational> upper;
    for (uint32_t e : index.global_entrances) upper.push_back(solution.values[entrance_state[e]]);
    return upper;
}

}  // namespace

ComposeOverResult compose_over(const StringDiagram& d, const ComponentIndex& index,
                               const ParetoCache& cache, const std::vector<Rational>& w) {
    if (w.size() != index.global_exits.size())
        throw ModelError("compose_over weight arity mismatch");
    for (const auto& leaf_name : index.leaf_names)
        if (d.leaf(leaf_name).exits().size() > 3)
            return {ComposeOverResult::Status::Unsupported, {}};

    OverVertexTable table = gather_vertices(index, cache);

    std::vector<Rational> exit_weight(index.exits.size());
    for (uint32_t pos = 0; pos < index.global_exits.size(); ++pos)
        exit_weight[index.global_exits[pos]] = w[pos];

    if (table.all_substochastic) {
        ComposeOverResult result;
        result.upper = solve_vertex_summary(
            index, w,
            [&](uint32_t c, uint32_t slot) -> const std::vector<PointQ>& {
                return *table.per_component[c][slot];
            });
        return result;
    }

    // Super-stochastic vertices (fresh box corners). The summary is no
    // longer an MDP; backward induction still gives a sound bound when the
    // wiring is acyclic, values merely may exceed 1.
    const size_t n_nodes = index.entrances.size() + index.exits.size();
    auto exit_node = [&](uint32_t x) { return index.entrances.size() + x; };
    std::vector<std::vector<uint32_t>> deps(n_nodes);  // node -> nodes it needs first
    for (uint32_t c = 0; c < index.components.size(); ++c) {
        const Component& comp = index.components[c];
        for (uint32_t slot = 0; slot < comp.n_entrances; ++slot)
            for (uint32_t j = 0; j < comp.n_exits; ++j)
                deps[index.entrance_id(c, slot)].push_back(
                    static_cast<uint32_t>(exit_node(index.exit_id(c, j))));
    }
    for (uint32_t x = 0; x < index.exits.size(); ++x)
        if (index.wiring[x] >= 0)
            deps[exit_node(x)].push_back(static_cast<uint32_t>(index.wiring[x]));

    std::vector<int8_t> mark(n_nodes, 0);  // 0 new, 1 on stack, 2 done
    std::vector<uint32_t> order;
    bool cyclic = false;
    auto dfs = [&](auto&& self, uint32_t node) -> void {
        if (mark[node] == 2 || cyclic) return;
        if (mark[node] == 1) { cyclic = true; return; }
        mark[node] = 1;
        for (uint32_t dep : deps[node]) self(self, dep);
        mark[node] = 2;
        order.push_back(node);
    };
    for (uint32_t node = 0; node < n_nodes && !cyclic; ++node) dfs(dfs, node);

    ComposeOverResult result;
    if (cyclic) {
        // Cut every polytope to the probability simplex (the achievable
        // sets live inside it) and solve the now-genuine summary exactly.
        auto clipped = gather_clipped_vertices(index, cache);
        result.upper = solve_vertex_summary(
            index, w,
            [&](uint32_t c, uint32_t slot) -> const std::vector<PointQ>& {
                return clipped[c][slot];
            });
        return result;
    }

    std::vector<Rational> value(n_nodes);
    for (uint32_t node : order) {
        if (node >= index.entrances.size()) {
            uint32_t x = node - static_cast<uint32_t>(index.entrances.size());
            value[node] = index.wiring[x] >= 0 ? value[static_cast<uint32_t>(index.wiring[x])]
                                               : exit_weight[x];
        } else {
            const LocalEnd& end = index.entrances[node];
            const Component& comp = index.components[end.component];
            const auto& verts = *table.per_component[end.component][end.slot];
            Rational best;
            for (const auto& v : verts) {
                Rational acc;
                for (uint32_t j = 0; j < comp.n_exits; ++j)
                    acc += v[j] * value[exit_node(index.exit_id(end.component, j))];
                best = std::max(best, acc);
            }
            value[node] = best;
        }
    }
    for (uint32_t e : index.global_entrances) result.upper.push_back(value[e]);
    return result;
}

}  // namespace compmdp
