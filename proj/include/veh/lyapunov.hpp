#pragma once

#include <Eigen/Dense>

#include "veh/model.hpp"

namespace veh {

/// Which Lyapunov equation is solved.
enum class LyapunovForm {
    covariance,     ///< A P + P A^T + Q = 0 (stationary state covariance)
    paper_literal,  ///< A^T P + P A + Q = 0 (observability orientation, kept for comparison)
};

struct CovarianceResult {
    Eigen::MatrixXd P;           ///< symmetrized solution
    double residual_norm = 0.0;  ///< ||A P + P A^T + Q||_F (or the transposed form)
};

/**
 * @brief Solves the continuous-time Lyapunov equation for a Hurwitz A.
 *
 * Vectorizes through (I (x) A + A (x) I) vec(P) = -vec(Q) and solves the dense
 * n^2 x n^2 system with partial pivoting plus one refinement step. Intended
 * for small n (the harvester model has n = 5).
 *
 * Throws UnstableError if A is not Hurwitz, SingularSolveError if the
 * Kronecker system is numerically singular and NumericError if the residual
 * exceeds 1e-8 (2 ||A|| ||P|| + ||Q||).
 */
CovarianceResult solve_stationary_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                                             LyapunovForm form = LyapunovForm::covariance);

/// Stationary mean power J = C P C^T with Q = B_xi W B_xi^T.
double mean_power(const StateSpaceModel& m, double W,
                  LyapunovForm form = LyapunovForm::covariance);

/// Full stationary covariance of the five states under intensity W.
CovarianceResult stationary_covariance(const StateSpaceModel& m, double W,
                                       LyapunovForm form = LyapunovForm::covariance);

} // namespace veh
