#include "mfbsde/assignment.hpp"

#include <limits>
#include <string>

#include "mfbsde/errors.hpp"

namespace mfbsde {

Assignment solve_assignment(std::span<const double> cost, std::size_t n) {
    if (cost.size() != n * n)
        throw ShapeError("solve_assignment: cost matrix has " +
                         std::to_string(cost.size()) + " entries, expected " +
                         std::to_string(n * n));
    Assignment out;
    if (n == 0) return out;

    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; column 0 is the virtual source.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    out.row_to_col.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) out.row_to_col[match[j] - 1] = j - 1;
    // Sum the chosen entries directly instead of reading -v[0], so the total
    // carries no accumulated potential round-off.
    for (std::size_t r = 0; r < n; ++r) out.total_cost += cost[r * n + out.row_to_col[r]];
    return out;
}

}  // namespace mfbsde
