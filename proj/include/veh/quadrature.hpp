#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace veh {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;          ///< summed Gauss-Kronrod error estimate
    std::size_t intervals = 0;
    std::size_t evaluations = 0;
};

/**
 * @brief Globally adaptive Gauss-Kronrod (7/15) integration over [front, back].
 *
 * `breakpoints` must be sorted and hold at least two points; every listed
 * point becomes an initial subinterval boundary, so place them at narrow
 * features (resonance peaks) the integrand is known to have. The interval
 * with the largest error estimate is bisected until the summed estimate
 * falls below max(abs_tol, rel_tol |I|). The final sum runs over intervals
 * in left-endpoint order, so results do not depend on the refinement order.
 *
 * Throws ToleranceError when max_intervals is reached or no interval can be
 * subdivided further before the tolerance is met.
 */
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    std::vector<double> breakpoints, double rel_tol,
                                    double abs_tol, std::size_t max_intervals = 50000);

} // namespace veh
