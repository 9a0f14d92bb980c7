#pragma once

#include <cstddef>
#include <vector>

namespace regdp {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    std::size_t pivots = 0;
};

/**
 * Dense two-phase tableau simplex for
 *
 *   maximize c'x  subject to  A x <= b,  x >= 0.
 *
 * Entering columns are chosen by most negative reduced cost with ties broken
 * on the lowest variable index, leaving rows by minimum ratio with ties broken
 * on the lowest basic index. Intended for problems with tens of variables.
 */
LpSolution simplex_maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                            const std::vector<double>& c, std::size_t max_pivots = 100000, double eps = 1e-9);

}  // namespace regdp
