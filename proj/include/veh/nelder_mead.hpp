#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace veh {

struct NelderMeadOptions {
    double initial_step = 0.5;       ///< edge length of the axis-aligned start simplex
    double tol = 1e-6;               ///< stop once every vertex is within tol of the best
    std::size_t max_iterations = 2000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<std::pair<std::vector<double>, double>> trace;  ///< best vertex per iteration
};

/**
 * Minimizes f with the standard reflection (1), expansion (2), contraction
 * (1/2) and shrink (1/2) moves. Non-finite values count as +infinity, which
 * lets callers encode hard constraints. Ties keep the older vertex first.
 */
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, const NelderMeadOptions& opts = {});

} // namespace veh
