#include "compmdp/linear.hpp"

#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "compmdp/errors.hpp"

namespace compmdp {

std::vector<std::vector<Rational>> solve_sparse_linear(
    const std::vector<SparseRow>& input_rows,
    const std::vector<std::vector<Rational>>& rhs_columns) {
    const uint32_t n = static_cast<uint32_t>(input_rows.size());
    const size_t k = rhs_columns.size();
    for (const auto& rhs : rhs_columns)
        if (rhs.size() != n) throw ModelError("linear solve: rhs length mismatch");

    std::vector<std::unordered_map<uint32_t, Rational>> rows(n);
    std::vector<std::unordered_set<uint32_t>> col_rows(n);
    for (uint32_t r = 0; r < n; ++r) {
        for (const auto& [c, v] : input_rows[r]) {
            if (c >= n) throw ModelError("linear solve: column out of range");
            if (v == 0) continue;
            auto [it, fresh] = rows[r].emplace(c, v);
            if (!fresh) {
                it->second += v;
                if (it->second == 0) { rows[r].erase(it); continue; }
            }
            col_rows[c].insert(r);
        }
    }
    // rhs[r][j] is the j-th right-hand side at row r.
    std::vector<std::vector<Rational>> rhs(n, std::vector<Rational>(k));
    for (size_t j = 0; j < k; ++j)
        for (uint32_t r = 0; r < n; ++r) rhs[r][j] = rhs_columns[j][r];

    std::vector<int8_t> row_done(n, 0), col_done(n, 0);
    std::vector<std::pair<uint32_t, uint32_t>> pivots;  // (row, col) in elimination order
    pivots.reserve(n);

    for (uint32_t step = 0; step < n; ++step) {
        // Cheapest column first, then the sparsest row holding it.
        uint32_t pivot_col = n;
        size_t best_col_count = std::numeric_limits<size_t>::max();
        for (uint32_t c = 0; c < n; ++c) {
            if (col_done[c]) continue;
            size_t count = col_rows[c].size();
            if (count == 0) throw ModelError("linear solve: singular system");
            if (count < best_col_count) {
                best_col_count = count;
                pivot_col = c;
                if (count == 1) break;
            }
        }
        uint32_t pivot_row = n;
        size_t best_row_nnz = std::numeric_limits<size_t>::max();
        for (uint32_t r : col_rows[pivot_col]) {
            if (rows[r].size() < best_row_nnz) {
                best_row_nnz = rows[r].size();
                pivot_row = r;
            }
        }
        row_done[pivot_row] = 1;
        col_done[pivot_col] = 1;
        pivots.emplace_back(pivot_row, pivot_col);
        for (const auto& [c, v] : rows[pivot_row]) col_rows[c].erase(pivot_row);

        const Rational pivot_value = rows[pivot_row].at(pivot_col);
        std::vector<uint32_t> touched(col_rows[pivot_col].begin(), col_rows[pivot_col].end());
        for (uint32_t r : touched) {
            Rational factor = rows[r].at(pivot_col) / pivot_value;
            for (const auto& [c, v] : rows[pivot_row]) {
                auto it = rows[r].find(c);
                if (it == rows[r].end()) {
                    Rational fill = -factor * v;
                    if (fill != 0) {
                        rows[r].emplace(c, std::move(fill));
                        col_rows[c].insert(r);
                    }
                } else {
                    it->second -= factor * v;
                    if (it->second == 0) {
                        rows[r].erase(it);
                        col_rows[c].erase(r);
                    }
                }
            }
            for (size_t j = 0; j < k; ++j) rhs[r][j] -= factor * rhs[pivot_row][j];
        }
    }

    std::vector<std::vector<Rational>> solution(k, std::vector<Rational>(n));
    for (auto it = pivots.rbegin(); it != pivots.rend(); ++it) {
        auto [r, c] = *it;
        const Rational& pivot_value = rows[r].at(c);
        for (size_t j = 0; j < k; ++j) {
            Rational acc = rhs[r][j];
            for (const auto& [c2, v] : rows[r])
                if (c2 != c) acc -= v * solution[j][c2];
            solution[j][c] = acc / pivot_value;
        }
    }
    return solution;
}

}  // namespace compmdp
