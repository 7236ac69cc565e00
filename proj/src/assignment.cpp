#include "fasttrack/assignment.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace fasttrack {

namespace {

constexpr double kForbidden = 1e9;  // gated cells and impossible dummy pairings

// Jonker-Volgenant style shortest augmenting path on a square matrix.
// Returns row -> col.
std::vector<int> solve_square(const Matrix& cost) {
    const int n = cost.rows;
    const double inf = std::numeric_limits<double>::max() / 4.0;
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // col -> row, 1-based
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = match[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost.at(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)]) - 1] = j - 1;
    }
    return row_to_col;
}

}  // namespace

AssignmentResult hungarian_assign(const CostMatrix& cost, double reject_above) {
    const int rows = cost.values.rows;
    const int cols = cost.values.cols;
    AssignmentResult res;
    if (rows == 0 || cols == 0) {
        for (int i = 0; i < rows; ++i) res.unmatched_rows.push_back(i);
        for (int j = 0; j < cols; ++j) res.unmatched_cols.push_back(j);
        return res;
    }

    // Extended square: every row/col gets a private dummy partner priced at
    // half the rejection threshold, so a real pairing is taken only when it
    // beats sending both sides to their dummies.
    const double dummy_cost = std::min(reject_above / 2.0, 1e8);
    const int n = rows + cols;
    Matrix extended(n, n, kForbidden);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            extended.at(i, j) = cost.is_gated(i, j) ? kForbidden : cost.values.at(i, j);
        }
        extended.at(i, cols + i) = dummy_cost;
    }
    for (int j = 0; j < cols; ++j) extended.at(rows + j, j) = dummy_cost;
    for (int i = rows; i < n; ++i) {
        for (int j = cols; j < n; ++j) extended.at(i, j) = 0.0;
    }

    const std::vector<int> row_to_col = solve_square(extended);
    std::vector<bool> col_matched(static_cast<std::size_t>(cols), false);
    for (int i = 0; i < rows; ++i) {
        const int j = row_to_col[static_cast<std::size_t>(i)];
        if (j < cols && !cost.is_gated(i, j) && cost.values.at(i, j) <= reject_above) {
            res.matches.emplace_back(i, j);
            col_matched[static_cast<std::size_t>(j)] = true;
        } else {
            res.unmatched_rows.push_back(i);
        }
    }
    for (int j = 0; j < cols; ++j) {
        if (!col_matched[static_cast<std::size_t>(j)]) res.unmatched_cols.push_back(j);
    }
    return res;
}

}  // namespace fasttrack
