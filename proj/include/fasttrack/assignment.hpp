#ifndef FASTTRACK_ASSIGNMENT_HPP
#define FASTTRACK_ASSIGNMENT_HPP

#include <utility>
#include <vector>

#include "fasttrack/tensor.hpp"

namespace fasttrack {

// Rectangular cost matrix with optional per-cell gating; gated cells can
// never be assigned.
struct CostMatrix {
    Matrix values;
    std::vector<bool> gated;  // row-major, empty means nothing is gated

    bool is_gated(int row, int col) const {
        return !gated.empty() &&
               gated[static_cast<std::size_t>(row) * values.cols + static_cast<std::size_t>(col)];
    }
};

struct AssignmentResult {
    std::vector<std::pair<int, int>> matches;  // (row, col), ascending rows
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
};

// Minimum-cost one-to-one assignment (shortest augmenting path, O(n^3)).
// Rectangular inputs are handled by dummy padding; a pair is left unmatched
// rather than assigned at cost above reject_above.
AssignmentResult hungarian_assign(const CostMatrix& cost, double reject_above);

}  // namespace fasttrack

#endif
