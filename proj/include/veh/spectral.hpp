#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "veh/model.hpp"

namespace veh {

/// Which closed form maps xi to v in the frequency domain.
enum class TransferMode {
    statespace,  ///< C (i w I - A)^-1 B_xi, consistent with the time-domain model
    paper,       ///< A(w) B(w) D(w) / (1 - C(w) D(w)) with the printed factors
};

enum class TailPolicy {
    envelope,  ///< smallest cutoff whose c/w^4 envelope bounds the tail by abs_tol
    fixed,     ///< integrate up to `omega_max_fixed` and report the envelope bound only
};

struct QuadratureOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    TailPolicy omega_max_policy = TailPolicy::envelope;
    double omega_max_fixed = 0.0;
    std::size_t max_intervals = 50000;

    void validate() const;
};

struct SpectralCurve {
    std::vector<double> omega;
    std::vector<double> gain_sq;
};

struct SpectralPower {
    double J = 0.0;                      ///< (W / 2 pi) int |H|^2 dw over the real line
    double unnormalized_integral = 0.0;  ///< int |H|^2 dw over the real line, no W or 2 pi
    double error_estimate = 0.0;         ///< quadrature error estimate on J
    double omega_max = 0.0;
    double tail_bound = 0.0;             ///< upper bound on the truncated part of J
    std::size_t intervals = 0;
};

/// H(i omega) = C (i omega I - A)^-1 B_xi via a complex LU solve.
std::complex<double> transfer_statespace(const StateSpaceModel& m, double omega);

/**
 * @brief Frequency response assembled from the printed factors
 *
 *   A = 1 / (lambda^2 - w^2 + 2 zeta_s lambda w i)
 *   B = (w^2 - K_m) / (1 + K_m - w^2 + 2 zeta_h w i)
 *   C = -kappa^2 / (1 + K_m - w^2 + 2 zeta_h w i)
 *   D = w i / (alpha - K_e + w i)
 *
 * returning A B D / (1 - C D). Throws PoleOnGridError if a denominator vanishes.
 */
std::complex<double> transfer_paper_literal(const HarvesterParams& p, const ControlGains& g,
                                            double omega);

/// Parseval evaluation of the stationary mean power from the state-space response.
SpectralPower harvested_power_spectral(const StateSpaceModel& m, double W,
                                       const QuadratureOptions& opts = {});

/// Parseval evaluation for a general stable single-input single-output (A, B, C).
SpectralPower harvested_power_spectral(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                       const Eigen::RowVectorXd& C, double W,
                                       const QuadratureOptions& opts = {});

/// Same integral with the printed closed-form factors in place of the state-space response.
SpectralPower harvested_power_paper_literal(const HarvesterParams& p, const ControlGains& g,
                                            double W, const QuadratureOptions& opts = {});

/// Pointwise |H(i omega)|^2 over a nonempty increasing grid.
SpectralCurve spectrum_curve(const StateSpaceModel& m, std::span<const double> grid);

} // namespace veh
