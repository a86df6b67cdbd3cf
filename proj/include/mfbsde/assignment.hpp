#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfbsde {

struct Assignment {
    std::vector<std::size_t> row_to_col;
    double total_cost = 0.0;
};

/// Minimum-cost perfect matching on a dense n x n row-major cost matrix
/// (shortest augmenting path form of the Hungarian method, O(n^3)).
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

}  // namespace mfbsde
