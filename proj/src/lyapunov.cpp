#include "veh/lyapunov.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "veh/errors.hpp"

namespace veh {

namespace {

// Kronecker operator L with vec(A P + P A^T) = L vec(P), column-major vec.
Eigen::MatrixXd lyapunov_operator(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        // diagonal block j of I (x) A is A; block (i, j) of A (x) I is A(i, j) I.
        L.block(j * n, j * n, n, n) += A;
        for (Eigen::Index i = 0; i < n; ++i) {
            L.block(i * n, j * n, n, n).diagonal().array() += A(i, j);
        }
    }
    return L;
}

void require_symmetric_psd(const Eigen::MatrixXd& Q) {
    const double scale = std::max(Q.norm(), std::numeric_limits<double>::min());
    if ((Q - Q.transpose()).norm() > 1e-12 * scale) {
        throw DomainError("lyapunov", "forcing matrix Q is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12 * std::max(Q.trace(), 0.0) - 1e-300) {
        throw DomainError("lyapunov", "forcing matrix Q is not positive semidefinite");
    }
}

} // namespace

CovarianceResult solve_stationary_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                                             LyapunovForm form) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || Q.rows() != n || Q.cols() != n) {
        throw DomainError("lyapunov", "A and Q must be square of equal size");
    }
    const StabilityReport stab = is_hurwitz(A);
    if (!stab.stable) {
        throw UnstableError("lyapunov", "A is not Hurwitz (max real eigenvalue part " +
                                            std::to_string(stab.margin) + ")");
    }
    require_symmetric_psd(Q);

    const Eigen::MatrixXd Aop = form == LyapunovForm::covariance ? A : Eigen::MatrixXd(A.transpose());
    const Eigen::MatrixXd L = lyapunov_operator(Aop);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(L);
    if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon() /
                           static_cast<double>(n * n))) {
        throw SingularSolveError("lyapunov", "Kronecker system is numerically singular (rcond " +
                                                 std::to_string(lu.rcond()) + ")");
    }
    const Eigen::Map<const Eigen::VectorXd> q(Q.data(), n * n);
    Eigen::VectorXd p = lu.solve(-q);
    p += lu.solve(-q - L * p);

    Eigen::MatrixXd P = Eigen::Map<Eigen::MatrixXd>(p.data(), n, n);
    P = 0.5 * (P + P.transpose()).eval();
    if (!P.allFinite()) {
        throw NumericError("lyapunov", "non-finite covariance");
    }

    CovarianceResult r;
    r.residual_norm = (Aop * P + P * Aop.transpose() + Q).norm();
    const double tol = 1e-8 * (2.0 * A.norm() * P.norm() + Q.norm());
    if (r.residual_norm > tol) {
        throw NumericError("lyapunov", "Lyapunov residual " + std::to_string(r.residual_norm) +
                                           " exceeds tolerance " + std::to_string(tol));
    }
    r.P = std::move(P);
    return r;
}

CovarianceResult stationary_covariance(const StateSpaceModel& m, double W, LyapunovForm form) {
    if (!(W >= 0.0) || !std::isfinite(W)) {
        throw DomainError("lyapunov", "noise intensity W must be >= 0");
    }
    // Solve once at unit intensity and scale, so J is exactly linear in W.
    const Eigen::MatrixXd Q = m.B_xi * m.B_xi.transpose();
    CovarianceResult r = solve_stationary_covariance(m.A, Q, form);
    r.P *= W;
    r.residual_norm *= W;
    return r;
}

double mean_power(const StateSpaceModel& m, double W, LyapunovForm form) {
    const CovarianceResult r = stationary_covariance(m, W, form);
    const double J = (m.C * r.P * m.C.transpose())(0, 0);
    return std::max(J, 0.0);
}

} // namespace veh
