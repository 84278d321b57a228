#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "veh/model.hpp"
#include "veh/spectral.hpp"

namespace veh {

enum class EvalMethod { lyapunov, spectral };

const char* to_string(EvalMethod m) noexcept;
const char* to_string(TransferMode m) noexcept;

/// Mean power J(K_m, K_e) by the chosen route. `transfer` only matters for spectral.
struct PowerEvaluator {
    EvalMethod method = EvalMethod::lyapunov;
    TransferMode transfer = TransferMode::statespace;
    QuadratureOptions quadrature;

    double operator()(const HarvesterParams& p, const ControlGains& g) const;
};

struct SweepFailure {
    std::size_t i = 0;
    std::size_t j = 0;
    std::string message;
};

struct SweepResult {
    std::vector<double> km_values;
    std::vector<double> ke_values;
    Eigen::MatrixXd J;  ///< J(i, j) at (km_values[i], ke_values[j]); NaN marks a failed cell
    EvalMethod method = EvalMethod::lyapunov;
    TransferMode transfer = TransferMode::statespace;
    std::vector<SweepFailure> failures;

    bool has_failures() const noexcept { return !failures.empty(); }

    /// Largest finite entry; ties go to the smallest (i, j) lexicographically.
    std::pair<std::size_t, std::size_t> argmax() const;
    std::size_t argmax_over_ke(std::size_t i) const;  ///< best column in row i
    std::size_t argmax_over_km(std::size_t j) const;  ///< best row in column j
};

std::vector<double> linspace(double lo, double hi, std::size_t n);
std::vector<double> logspace(double lo, double hi, std::size_t n);  ///< geometric, endpoints included

/// Evaluates every grid cell; cells run concurrently but land at their own index.
SweepResult sweep(const HarvesterParams& p, const std::vector<double>& km_grid,
                  const std::vector<double>& ke_grid, const PowerEvaluator& evaluator = {},
                  unsigned threads = 0);

struct TracePoint {
    ControlGains gains;
    double J = 0.0;
};

struct StartRecord {
    ControlGains init;
    ControlGains gains_star;
    double J_star = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct OptimOptions {
    PowerEvaluator evaluator;
    std::size_t max_iterations = 2000;
    double tol = 1e-6;            ///< simplex diameter in (ln K_m, ln(1 + K_e))
    double initial_step = 0.5;
    std::size_t starts = 5;       ///< init plus up to four fixed lattice points
    std::optional<double> fixed_km;  ///< optimize K_e only
    std::optional<double> fixed_ke;  ///< optimize K_m only
};

struct OptimResult {
    ControlGains gains_star;
    double J_star = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<TracePoint> trace;  ///< best iterate per step of the winning start
    std::vector<StartRecord> starts;
};

/// Start points used after `init`, in order.
std::vector<ControlGains> lattice_starts();

/**
 * @brief Local maximization of J over K_m > 0, K_e > -1.
 *
 * Nelder-Mead runs in a = ln K_m, b = ln(1 + K_e), so every iterate is
 * feasible; gains whose closed loop fails the Hurwitz check (or whose
 * evaluation throws) score -infinity. The best of all starts is returned.
 */
OptimResult maximize_gains(const HarvesterParams& p, const ControlGains& init,
                           const OptimOptions& opts = {});

/// Gains from transformed coordinates; K_e = expm1(b).
ControlGains gains_from_log(double a, double b) noexcept;

} // namespace veh
