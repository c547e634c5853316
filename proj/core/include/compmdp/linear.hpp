#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "compmdp/rational.hpp"

namespace compmdp {

using SparseRow = std::vector<std::pair<uint32_t, Rational>>;

/// Solves A x = b exactly for square sparse A and one or more right-hand
/// sides, sharing the elimination across all of them. Pivots are chosen by
/// a Markowitz-style fill estimate. Throws ModelError on a singular system.
std::vector<std::vector<Rational>> solve_sparse_linear(
    const std::vector<SparseRow>& rows,
    const std::vector<std::vector<Rational>>& rhs_columns);

}  // namespace compmdp
