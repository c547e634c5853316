#pragma once

#include <cstdint>
#include <string>

#include "compmdp/model_format.hpp"

namespace compmdp {

enum class BenchFamily { Rooms, Birooms, Chains, ChainsLoop };
enum class BenchLeaf { RmS, RmB, Dice };

struct RoomParams {
    bool safe = true;
    bool windy = false;
    uint32_t dim = 7;  // 7 for the small room, 101 for the big one
};

struct DiceParams {
    uint32_t exits = 2;  // 2 or 4 score bands
    uint32_t rounds = 5;
};

struct BenchSpec {
    BenchFamily family = BenchFamily::Chains;
    uint32_t n = 1;
    BenchLeaf leaf = BenchLeaf::Dice;
    RoomParams room;
    DiceParams dice;
    uint64_t seed = 0;

    void validate() const;
    std::string name() const;
};

/// "rooms:3:rms-safe-calm", "birooms:3:rms-unsafe-windy", "chains:10:dice2",
/// "chainsloop:10:dice2-r5", optionally ":seed=7".
BenchSpec parse_bench_spec(const std::string& text);

/// Grid-room leaf: dim x dim cells with slippy movement, absorbing holes,
/// and door exits at the edge centers.
OpenMdp gen_room_leaf(const RoomParams& params, bool bidirectional, uint64_t seed);

/// Dice-game leaf: per round pick one of three biased dice, scores clamped
/// to [0,100]; the final score selects a band exit.
OpenMdp gen_dice_leaf(const DiceParams& params, bool loop, uint64_t seed);

/// Diagram, query and metadata for one benchmark instance. Rooms/Birooms
/// place n*n room occurrences along a serpentine corridor; Chains and
/// ChainsLoop place n dice games in a row, the loop variant wiring each
/// failed game back into its predecessor.
ModelDocument gen_diagram(const BenchSpec& spec);

}  // namespace compmdp
