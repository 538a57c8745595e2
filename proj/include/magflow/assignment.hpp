#pragma once
//
// Maximum-weight bipartite assignment (Hungarian algorithm, O(n^2 m)).
//

#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace magflow {

/// For each row the matched column, or -1. Rectangular weights are fine;
/// pairs with weight <= 0 are reported as unmatched.
inline std::vector<int> max_weight_assignment(const Eigen::MatrixXd& w) {
    const int rows = static_cast<int>(w.rows());
    const int cols = static_cast<int>(w.cols());
    std::vector<int> match(rows, -1);
    if (rows == 0 || cols == 0) return match;
    // NaN would never win a comparison below and the search would not terminate.
    if (!w.allFinite()) throw std::invalid_argument("max_weight_assignment: non-finite weight");
    // Square up with zero-weight dummies and minimise -w.
    const int n = std::max(rows, cols);
    auto cost = [&](int i, int j) { return (i < rows && j < cols) ? -w(i, j) : 0.0; };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    for (int j = 1; j <= n; ++j) {
        const int i = p[j] - 1;
        const int c = j - 1;
        if (i >= 0 && i < rows && c < cols && w(i, c) > 0.0) match[i] = c;
    }
    return match;
}

}  // namespace magflow
