#include "compmdp/benchgen.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "compmdp/errors.hpp"

namespace compmdp {

void BenchSpec::validate() const {
    if (n < 1) throw InputError("benchmark size must be at least 1");
    if (family == BenchFamily::Rooms || family == BenchFamily::Birooms) {
        if (leaf == BenchLeaf::Dice)
            throw InputError("room grids take the RmS or RmB leaf");
    } else {
        if (leaf != BenchLeaf::Dice)
            throw InputError("chains take the Dice leaf");
    }
    if (dice.exits != 2 && dice.exits != 4) throw InputError("dice leaf supports 2 or 4 exits");
    if (dice.rounds < 1) throw InputError("dice leaf needs at least one round");
}

std::string BenchSpec::name() const {
    std::ostringstream os;
    switch (family) {
        case BenchFamily::Rooms: os << "rooms"; break;
        case BenchFamily::Birooms: os << "birooms"; break;
        case BenchFamily::Chains: os << "chains"; break;
        case BenchFamily::ChainsLoop: os << "chainsloop"; break;
    }
    os << ":" << n << ":";
    switch (leaf) {
        case BenchLeaf::RmS:
        case BenchLeaf::RmB:
            os << (leaf == BenchLeaf::RmS ? "rms" : "rmb")
               << (room.safe ? "-safe" : "-unsafe") << (room.windy ? "-windy" : "-calm");
            break;
        case BenchLeaf::Dice:
            os << "dice" << dice.exits;
            if (dice.rounds != 5) os << "-r" << dice.rounds;
            break;
    }
    if (seed != 0) os << ":seed=" << seed;
    return os.str();
}

BenchSpec parse_bench_spec(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 2) throw InputError("bench spec needs at least family:N, got '" + text + "'");

    BenchSpec spec;
    std::string family = parts[0];
    std::transform(family.begin(), family.end(), family.begin(), ::tolower);
    if (family == "rooms") spec.family = BenchFamily::Rooms;
    else if (family == "birooms") spec.family = BenchFamily::Birooms;
    else if (family == "chains") spec.family = BenchFamily::Chains;
    else if (family == "chainsloop") spec.family = BenchFamily::ChainsLoop;
    else throw InputError("unknown benchmark family '" + parts[0] + "'");

    try {
        spec.n = static_cast<uint32_t>(std::stoul(parts[1]));
    } catch (const std::exception&) {
        throw InputError("bad benchmark size '" + parts[1] + "'");
    }

    bool rooms = spec.family == BenchFamily::Rooms || spec.family == BenchFamily::Birooms;
    spec.leaf = rooms ? BenchLeaf::RmS : BenchLeaf::Dice;

    size_t next = 2;
    if (parts.size() > next && parts[next].rfind("seed=", 0) != 0) {
        std::string leaf = parts[next++];
        std::transform(leaf.begin(), leaf.end(), leaf.begin(), ::tolower);
        std::vector<std::string> words;
        std::stringstream ls(leaf);
        while (std::getline(ls, item, '-')) words.push_back(item);
        if (words.empty()) throw InputError("empty leaf spec");
        if (words[0] == "rms" || words[0] == "rmb") {
            spec.leaf = words[0] == "rms" ? BenchLeaf::RmS : BenchLeaf::RmB;
            spec.room.dim = spec.leaf == BenchLeaf::RmS ? 7 : 101;
            for (size_t i = 1; i < words.size(); ++i) {
                if (words[i] == "safe") spec.room.safe = true;
                else if (words[i] == "unsafe") spec.room.safe = false;
                else if (words[i] == "calm") spec.room.windy = false;
                else if (words[i] == "windy") spec.room.windy = true;
                else throw InputError("unknown room variant '" + words[i] + "'");
            }
        } else if (words[0] == "dice2" || words[0] == "dice4") {
            spec.leaf = BenchLeaf::Dice;
            spec.dice.exits = words[0] == "dice2" ? 2 : 4;
            for (size_t i = 1; i < words.size(); ++i) {
                if (words[i].size() > 1 && words[i][0] == 'r')
                    spec.dice.rounds = static_cast<uint32_t>(std::stoul(words[i].substr(1)));
                else
                    throw InputError("unknown dice variant '" + words[i] + "'");
            }
        } else {
            throw InputError("unknown leaf '" + words[0] + "'");
        }
    }
    if (parts.size() > next) {
        if (parts[next].rfind("seed=", 0) != 0)
            throw InputError("expected seed=..., got '" + parts[next] + "'");
        spec.seed = std::stoull(parts[next].substr(5));
        ++next;
    }
    if (parts.size() > next) throw InputError("trailing bench spec segment '" + parts[next] + "'");
    spec.validate();
    return spec;
}

namespace {

constexpr const char* kDirNames[4] = {"n", "e", "s", "w"};
// row/col deltas for N, E, S, W with row 0 at the south edge
constexpr int kDr[4] = {1, 0, -1, 0};
constexpr int kDc[4] = {0, 1, 0, -1};

std::string cell_name(uint32_t r, uint32_t c) {
    return "c" + std::to_string(r) + "_" + std::to_string(c);
}

}  // namespace

OpenMdp gen_room_leaf(const RoomParams& params, bool bidirectional, uint64_t seed) {
    const uint32_t dim = params.dim;
    if (dim < 3) throw InputError("room dimension must be at least 3");
    const uint32_t mid = dim / 2;

    const Rational p_main = params.windy ? Rational(7, 10) : Rational(9, 10);
    const Rational p_side = (Rational(1) - p_main) / 2;

    Mdp<Rational> mdp;
    std::vector<std::vector<StateId>> cells(dim, std::vector<StateId>(dim));
    for (uint32_t r = 0; r < dim; ++r)
        for (uint32_t c = 0; c < dim; ++c) cells[r][c] = mdp.add_state(cell_name(r, c));

    // Door exit per direction; S and W doors only in the bidirectional room.
    const bool has_door[4] = {true, true, bidirectional, bidirectional};
    StateId door[4] = {0, 0, 0, 0};
    for (int d = 0; d < 4; ++d)
        if (has_door[d]) door[d] = mdp.add_state(std::string("door_") + kDirNames[d]);
    // Boundary cell adjacent to each door.
    const uint32_t door_r[4] = {dim - 1, mid, 0, mid};
    const uint32_t door_c[4] = {mid, dim - 1, mid, 0};

    StateId in_s = mdp.add_state("in_s");
    StateId in_w = mdp.add_state("in_w");
    StateId in_n = 0, in_e = 0;
    if (bidirectional) {
        in_n = mdp.add_state("in_n");
        in_e = mdp.add_state("in_e");
    }
    mdp.add_action(in_s, "enter").branches.push_back({cells[0][mid], Rational(1)});
    mdp.add_action(in_w, "enter").branches.push_back({cells[mid][0], Rational(1)});
    if (bidirectional) {
        mdp.add_action(in_n, "enter").branches.push_back({cells[dim - 1][mid], Rational(1)});
        mdp.add_action(in_e, "enter").branches.push_back({cells[mid][dim - 1], Rational(1)});
    }

    // Holes: seeded placement away from entry landings and door cells.
    std::set<std::pair<uint32_t, uint32_t>> reserved;
    for (int d = 0; d < 4; ++d) reserved.insert({door_r[d], door_c[d]});
    std::mt19937_64 rng(seed * 77003 + dim);
    std::set<std::pair<uint32_t, uint32_t>> holes;
    const uint32_t hole_count = params.safe ? 2 : 6;
    while (holes.size() < hole_count) {
        uint32_t r = static_cast<uint32_t>(rng() % dim), c = static_cast<uint32_t>(rng() % dim);
        if (reserved.count({r, c})) continue;
        holes.insert({r, c});
    }

    auto move_target = [&](uint32_t r, uint32_t c, int d) -> StateId {
        int nr = static_cast<int>(r) + kDr[d], nc = static_cast<int>(c) + kDc[d];
        if (nr < 0 || nc < 0 || nr >= static_cast<int>(dim) || nc >= static_cast<int>(dim)) {
            if (has_door[d] && r == door_r[d] && c == door_c[d]) return door[d];
            return cells[r][c];  // wall bump
        }
        return cells[static_cast<uint32_t>(nr)][static_cast<uint32_t>(nc)];
    };

    for (uint32_t r = 0; r < dim; ++r) {
        for (uint32_t c = 0; c < dim; ++c) {
            if (holes.count({r, c})) {
                for (int d = 0; d < 4; ++d) {
                    auto& action = mdp.add_action(cells[r][c], kDirNames[d]);
                    action.branches.push_back({cells[r][c], Rational(1)});
                }
                continue;
            }
            for (int d = 0; d < 4; ++d) {
                auto& action = mdp.add_action(cells[r][c], kDirNames[d]);
                // Slips go to the two lateral directions.
                std::map<StateId, Rational> mass;
                mass[move_target(r, c, d)] += p_main;
                mass[move_target(r, c, (d + 1) % 4)] += p_side;
                mass[move_target(r, c, (d + 3) % 4)] += p_side;
                for (const auto& [dst, p] : mass) action.branches.push_back({dst, p});
            }
        }
    }

    OpenEnds io;
    io.right_entrances = {in_s, in_w};
    io.right_exits = {door[0], door[1]};  // north, east
    if (bidirectional) {
        io.left_entrances = {in_n, in_e};
        io.left_exits = {door[2], door[3]};  // south, west
    }
    return OpenMdp(std::move(mdp), std::move(io));
}

namespace {

struct DiceTables {
    // face values -2..+3, one weight row per die
    std::vector<int> faces;
    std::vector<std::vector<uint32_t>> weights;
};

DiceTables make_dice(uint64_t seed) {
    DiceTables t;
    t.faces = {-2, -1, 0, 1, 2, 3};
    std::mt19937_64 rng(seed * 52361 + 9);
    // Three bias profiles: leaning low, flat, leaning high.
    const uint32_t base[3][6] = {{5, 4, 3, 2, 1, 1}, {2, 2, 2, 2, 2, 2}, {1, 1, 2, 3, 4, 5}};
    for (int die = 0; die < 3; ++die) {
        std::vector<uint32_t> row(6);
        for (int f = 0; f < 6; ++f) row[f] = base[die][f] + static_cast<uint32_t>(rng() % 3);
        t.weights.push_back(std::move(row));
    }
    return t;
}

uint32_t band_of(uint32_t score, uint32_t bands) {
    // bands=2: 0-49 / 50-100; bands=4: 0-24 / 25-49 / 50-74 / 75-100
    if (bands == 2) return score >= 50 ? 1 : 0;
    return std::min<uint32_t>(score / 25, 3);
}

}  // namespace

OpenMdp gen_dice_leaf(const DiceParams& params, bool loop, uint64_t seed) {
    const uint32_t bands = params.exits;
    DiceTables dice = make_dice(seed);

    Mdp<Rational> mdp;
    // Band sinks: the upper half advances (right exits), the lower half is
    // failure -- loop variants turn failures into left exits.
    std::vector<StateId> band_state(bands);
    auto band_name = [&](uint32_t b) {
        if (bands == 2) return std::string(b == 1 ? "hi" : "lo");
        return "band" + std::to_string(b);
    };
    for (uint32_t b = 0; b < bands; ++b) band_state[b] = mdp.add_state(band_name(b));

    const uint32_t n_in = bands / 2;
    std::vector<StateId> ins(n_in), backs;
    std::vector<uint32_t> in_score = n_in == 1 ? std::vector<uint32_t>{50}
                                               : std::vector<uint32_t>{50, 60};
    std::vector<uint32_t> back_score = n_in == 1 ? std::vector<uint32_t>{40}
                                                 : std::vector<uint32_t>{40, 30};
    for (uint32_t i = 0; i < n_in; ++i)
        ins[i] = mdp.add_state(n_in == 1 ? "in" : "in_" + std::to_string(i));
    if (loop)
        for (uint32_t i = 0; i < n_in; ++i)
            backs.push_back(mdp.add_state(n_in == 1 ? "back" : "back_" + std::to_string(i)));

    // Reachable (round, score) states only.
    std::map<std::pair<uint32_t, uint32_t>, StateId> game;
    std::vector<std::pair<uint32_t, uint32_t>> frontier;
    auto game_state = [&](uint32_t round, uint32_t score) {
        auto key = std::make_pair(round, score);
        auto it = game.find(key);
        if (it != game.end()) return it->second;
        StateId s = mdp.add_state("r" + std::to_string(round) + "_s" + std::to_string(score));
        game.emplace(key, s);
        frontier.push_back(key);
        return s;
    };

    for (uint32_t i = 0; i < n_in; ++i)
        mdp.add_action(ins[i], "enter").branches.push_back({game_state(0, in_score[i]), Rational(1)});
    for (uint32_t i = 0; i < backs.size(); ++i)
        mdp.add_action(backs[i], "enter").branches.push_back(
            {game_state(0, back_score[i]), Rational(1)});

    while (!frontier.empty()) {
        auto [round, score] = frontier.back();
        frontier.pop_back();
        StateId s = game.at({round, score});
        if (round == params.rounds) {
            mdp.add_action(s, "band").branches.push_back(
                {band_state[band_of(score, bands)], Rational(1)});
            continue;
        }
        for (int die = 0; die < 3; ++die) {
            auto& action = mdp.add_action(s, "d" + std::to_string(die));
            uint32_t total = 0;
            for (uint32_t wgt : dice.weights[die]) total += wgt;
            std::map<StateId, Rational> mass;
            for (size_t f = 0; f < dice.faces.size(); ++f) {
                int next = std::clamp<int>(static_cast<int>(score) + dice.faces[f], 0, 100);
                mass[game_state(round + 1, static_cast<uint32_t>(next))] +=
                    Rational(dice.weights[die][f], total);
            }
            for (const auto& [dst, p] : mass) action.branches.push_back({dst, p});
        }
    }

    OpenEnds io;
    io.right_entrances = ins;
    for (uint32_t b = bands / 2; b < bands; ++b) io.right_exits.push_back(band_state[b]);
    if (loop) {
        io.left_entrances = backs;
        for (uint32_t b = 0; b < bands / 2; ++b) io.left_exits.push_back(band_state[b]);
    }
    return OpenMdp(std::move(mdp), std::move(io));
}

ModelDocument gen_diagram(const BenchSpec& spec) {
    spec.validate();
    ModelDocument doc;

    const bool rooms = spec.family == BenchFamily::Rooms || spec.family == BenchFamily::Birooms;
    const bool bidirectional = spec.family == BenchFamily::Birooms;
    const bool loop = spec.family == BenchFamily::ChainsLoop;
    const std::string leaf_name = rooms ? "Room" : "Dice";
    const uint32_t occurrences = rooms ? spec.n * spec.n : spec.n;

    OpenMdp leaf = rooms ? gen_room_leaf(spec.room, bidirectional, spec.seed)
                         : gen_dice_leaf(spec.dice, loop, spec.seed);
    const size_t leaf_states = leaf.exact_mdp().state_count();
    const size_t wired =
        (occurrences - 1) * (leaf.io().right_exits.size() + leaf.io().left_exits.size());
    doc.leaves.emplace(leaf_name, std::move(leaf));

    NodePtr ast = make_leaf(leaf_name);
    for (uint32_t i = 1; i < occurrences; ++i) ast = make_seq(ast, make_leaf(leaf_name));
    doc.diagram = ast;

    const std::string last = leaf_name + "@" + std::to_string(occurrences - 1);
    const std::string first = leaf_name + "@0";
    doc.query.epsilon = 1e-4;
    if (rooms) {
        doc.query.entrance = first + "/in_w";
        doc.query.weights.emplace(last + "/door_e", Rational(1));
        doc.query.weights.emplace(last + "/door_n", Rational(0));
        if (bidirectional) {
            doc.query.weights.emplace(first + "/door_s", Rational(0));
            doc.query.weights.emplace(first + "/door_w", Rational(0));
        }
    } else {
        const bool two = spec.dice.exits == 2;
        doc.query.entrance = first + (two ? "/in" : "/in_0");
        if (two) {
            doc.query.weights.emplace(last + "/hi", Rational(1));
            if (loop) doc.query.weights.emplace(first + "/lo", Rational(0));
        } else {
            doc.query.weights.emplace(last + "/band3", Rational(1));
            doc.query.weights.emplace(last + "/band2", Rational(0));
            if (loop) {
                doc.query.weights.emplace(first + "/band0", Rational(0));
                doc.query.weights.emplace(first + "/band1", Rational(0));
            }
        }
    }

    nlohmann::json dynamics;
    if (rooms) {
        dynamics = {{"move_prob", spec.room.windy ? "7/10" : "9/10"},
                    {"holes", spec.room.safe ? 2 : 6},
                    {"dim", spec.room.dim},
                    {"arrangement", "serpentine"}};
    } else {
        dynamics = {{"faces", {-2, -1, 0, 1, 2, 3}},
                    {"rounds", spec.dice.rounds},
                    {"bands", spec.dice.exits}};
    }
    doc.metadata_json = nlohmann::json{{"generator", "compmdp-bench"},
                                       {"spec", spec.name()},
                                       {"seed", spec.seed},
                                       {"occurrences", occurrences},
                                       {"nominal_leaves", 1},
                                       {"leaf_states", leaf_states},
                                       {"wired_exits", wired},
                                       {"dynamics", dynamics}}
                            .dump();
    return doc;
}

}  // namespace compmdp
