#include "veh/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "veh/errors.hpp"
#include "veh/quadrature.hpp"

namespace veh {

namespace {

using cd = std::complex<double>;
using ComplexMatrix5 = Eigen::Matrix<cd, kStates, kStates>;
using ComplexVector5 = Eigen::Matrix<cd, kStates, 1>;

cd resolvent_gain(const StateSpaceModel& m, double omega) {
    ComplexMatrix5 M = -m.A.cast<cd>();
    M.diagonal().array() += cd(0.0, omega);
    const Eigen::PartialPivLU<ComplexMatrix5> lu(M);
    const ComplexVector5 x = lu.solve(m.B_xi.cast<cd>());
    const cd h = (m.C.cast<cd>() * x)(0, 0);
    if (!std::isfinite(h.real()) || !std::isfinite(h.imag())) {
        throw SingularSolveError("spectral", "resolvent (i w I - A) is singular at w = " +
                                                 std::to_string(omega));
    }
    return h;
}

// Initial subdivision: peak centers and shoulders of every pole, plus a
// geometric ladder so smooth decay regions start with sensible panels.
std::vector<double> breakpoints_from_poles(const Eigen::VectorXcd& poles, double omega_max) {
    std::vector<double> pts{0.0, omega_max};
    const auto add = [&](double w) {
        if (w > 0.0 && w < omega_max && std::isfinite(w)) pts.push_back(w);
    };
    for (const cd& p : poles) {
        const double center = std::abs(p.imag());
        const double width = std::abs(p.real());
        add(center);
        add(std::abs(p));
        for (const double k : {1.0, 4.0, 16.0}) {
            add(center - k * width);
            add(center + k * width);
        }
    }
    for (double w = 1e-2; w < omega_max; w *= 4.0) add(w);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

double frequency_floor(const StateSpaceModel& m, const Eigen::VectorXcd& poles) {
    double floor = poles.cwiseAbs().maxCoeff();
    floor = std::max(floor, m.params.lambda);
    if (m.gains) {
        floor = std::max(floor, std::sqrt(1.0 + m.gains->K_m));
        floor = std::max(floor, m.params.alpha / (1.0 + m.gains->K_e));
    } else {
        floor = std::max({floor, 1.0, m.params.alpha});
    }
    return 10.0 * floor;
}

// Cutoff such that (W / pi) c^2 / (3 w^3) <= abs_tol, given |H| <= c / w^2 above `valid_from`.
double envelope_cutoff(double c, double valid_from, double floor, double W, double abs_tol) {
    const double w_eff = W > 0.0 ? W : 1.0;
    // the small inflation keeps the rounded bound at or below abs_tol
    const double from_tail =
        std::cbrt(w_eff * c * c / (3.0 * std::numbers::pi * abs_tol)) * (1.0 + 1e-12);
    return std::max({valid_from, floor, from_tail});
}

SpectralPower integrate_power(const std::function<double(double)>& gain_sq,
                              const Eigen::VectorXcd& poles, double omega_max, double c,
                              double W, const QuadratureOptions& opts) {
    const double w_eff = W > 0.0 ? W : 1.0;
    // abs_tol is stated on J = (W / pi) * I.
    const double abs_tol_I = opts.abs_tol * std::numbers::pi / w_eff;
    const QuadratureResult q = integrate_adaptive(gain_sq, breakpoints_from_poles(poles, omega_max),
                                                  opts.rel_tol, abs_tol_I, opts.max_intervals);
    SpectralPower out;
    out.omega_max = omega_max;
    out.unnormalized_integral = 2.0 * q.value;
    out.J = W / std::numbers::pi * q.value;
    out.error_estimate = W / std::numbers::pi * q.error;
    out.tail_bound = W / std::numbers::pi * c * c / (3.0 * omega_max * omega_max * omega_max);
    out.intervals = q.intervals;
    return out;
}

void require_intensity(double W) {
    if (!(W >= 0.0) || !std::isfinite(W)) {
        throw DomainError("spectral", "noise intensity W must be >= 0");
    }
}

struct TailEnvelope {
    double c = 0.0;           // |H(i w)| <= c / w^2 ...
    double valid_from = 0.0;  // ... for w >= valid_from
};

// H(s) = sum_k C A^k B / s^(k+1); with C B = 0 and w >= 2 ||A||_F the series
// gives |H(i w)| <= 2 ||C|| ||B|| ||A||_F / w^2.
TailEnvelope statespace_envelope(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                 const Eigen::RowVectorXd& C) {
    if ((C * B)(0, 0) != 0.0) {
        throw DomainError("spectral", "tail envelope requires C B = 0 (strictly proper of degree 2)");
    }
    const double a_norm = A.norm();
    return {2.0 * C.norm() * B.norm() * a_norm, 2.0 * a_norm};
}

Eigen::VectorXcd checked_poles(const Eigen::MatrixXd& A, const QuadratureOptions& opts, double W) {
    opts.validate();
    require_intensity(W);
    const StabilityReport stab = is_hurwitz(A);
    if (!stab.stable) {
        throw UnstableError("spectral", "A is not Hurwitz (max real eigenvalue part " +
                                            std::to_string(stab.margin) + ")");
    }
    return Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues();
}

} // namespace

void QuadratureOptions::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw DomainError("spectral", "quadrature tolerances must be strictly positive");
    }
    if (omega_max_policy == TailPolicy::fixed && !(omega_max_fixed > 0.0)) {
        throw DomainError("spectral", "fixed tail policy needs omega_max_fixed > 0");
    }
}

std::complex<double> transfer_statespace(const StateSpaceModel& m, double omega) {
    return resolvent_gain(m, omega);
}

std::complex<double> transfer_paper_literal(const HarvesterParams& p, const ControlGains& g,
                                            double omega) {
    const cd iw(0.0, omega);
    const cd den_a = p.lambda * p.lambda - omega * omega + 2.0 * p.zeta_s * p.lambda * iw;
    const cd den_h = 1.0 + g.K_m - omega * omega + 2.0 * p.zeta_h * iw;
    const cd den_d = p.alpha - g.K_e + iw;
    if (den_a == 0.0 || den_h == 0.0 || den_d == 0.0) {
        throw PoleOnGridError("spectral", "closed-form transfer denominator vanishes at w = " +
                                              std::to_string(omega));
    }
    const cd A = 1.0 / den_a;
    const cd B = (omega * omega - g.K_m) / den_h;
    const cd C = -p.kappa * p.kappa / den_h;
    const cd D = iw / den_d;
    const cd den = 1.0 - C * D;
    if (den == 0.0) {
        throw PoleOnGridError("spectral", "1 - C D vanishes at w = " + std::to_string(omega));
    }
    return A * B * D / den;
}

SpectralPower harvested_power_spectral(const StateSpaceModel& m, double W,
                                       const QuadratureOptions& opts) {
    const Eigen::VectorXcd poles = checked_poles(m.A, opts, W);
    const TailEnvelope env = statespace_envelope(m.A, m.B_xi, m.C);
    const double omega_max =
        opts.omega_max_policy == TailPolicy::fixed
            ? opts.omega_max_fixed
            : envelope_cutoff(env.c, env.valid_from, frequency_floor(m, poles), W, opts.abs_tol);
    const auto gain_sq = [&m](double w) { return std::norm(resolvent_gain(m, w)); };
    return integrate_power(gain_sq, poles, omega_max, env.c, W, opts);
}

SpectralPower harvested_power_spectral(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                       const Eigen::RowVectorXd& C, double W,
                                       const QuadratureOptions& opts) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.size() != n || C.size() != n) {
        throw DomainError("spectral", "A, B, C dimensions do not match");
    }
    const Eigen::VectorXcd poles = checked_poles(A, opts, W);
    const TailEnvelope env = statespace_envelope(A, B, C);
    const double omega_max =
        opts.omega_max_policy == TailPolicy::fixed
            ? opts.omega_max_fixed
            : envelope_cutoff(env.c, env.valid_from, 10.0 * poles.cwiseAbs().maxCoeff(), W,
                              opts.abs_tol);
    const Eigen::MatrixXcd Ac = A.cast<cd>();
    const Eigen::VectorXcd Bc = B.cast<cd>();
    const Eigen::RowVectorXcd Cc = C.cast<cd>();
    const auto gain_sq = [&](double w) {
        Eigen::MatrixXcd M = -Ac;
        M.diagonal().array() += cd(0.0, w);
        const cd h = (Cc * M.partialPivLu().solve(Bc))(0, 0);
        return std::norm(h);
    };
    return integrate_power(gain_sq, poles, omega_max, env.c, W, opts);
}

SpectralPower harvested_power_paper_literal(const HarvesterParams& p, const ControlGains& g,
                                            double W, const QuadratureOptions& opts) {
    opts.validate();
    require_intensity(W);
    p.validate_structure();

    // V = A N_B s / cubic(s) with s = i w, where
    // cubic = (s^2 + 2 zeta_h s + 1 + K_m)(s + alpha - K_e) + kappa^2 s.
    const double k2 = p.kappa * p.kappa;
    const double q = p.alpha - g.K_e;
    const double h0 = 1.0 + g.K_m;
    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    // monic cubic s^3 + c2 s^2 + c1 s + c0
    const double c2 = 2.0 * p.zeta_h + q;
    const double c1 = h0 + 2.0 * p.zeta_h * q + k2;
    const double c0 = h0 * q;
    companion(0, 0) = -c2;
    companion(0, 1) = -c1;
    companion(0, 2) = -c0;
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    const Eigen::Vector3cd cubic_roots = Eigen::EigenSolver<Eigen::Matrix3d>(companion, false).eigenvalues();
    Eigen::VectorXcd poles(5);
    const cd disc = std::sqrt(cd(p.zeta_s * p.zeta_s - 1.0, 0.0));
    poles << p.lambda * (-p.zeta_s + disc), p.lambda * (-p.zeta_s - disc), cubic_roots;
    for (const cd& r : poles) {
        if (std::abs(r.real()) <= kStabilityThreshold * std::max(1.0, std::abs(r))) {
            throw PoleOnGridError("spectral", "closed-form transfer has a pole on the real frequency axis");
        }
    }

    // For w >= 2 max(|roots|, lambda, sqrt|K_m|): |A| <= 4/(3 w^2), |N_B| <= 5 w^2 / 4,
    // |cubic| >= (w / 2)^3, hence |V| <= (40/3) / w^2.
    double valid_from = std::max(p.lambda, std::sqrt(std::abs(g.K_m)));
    valid_from = 2.0 * std::max(valid_from, cubic_roots.cwiseAbs().maxCoeff());
    const double c = 40.0 / 3.0;
    const double floor = 10.0 * std::max({p.lambda, std::sqrt(std::abs(h0)), std::abs(q)});
    const double omega_max = opts.omega_max_policy == TailPolicy::fixed
                                 ? opts.omega_max_fixed
                                 : envelope_cutoff(c, valid_from, floor, W, opts.abs_tol);

    const auto gain_sq = [&](double w) { return std::norm(transfer_paper_literal(p, g, w)); };
    return integrate_power(gain_sq, poles, omega_max, c, W, opts);
}

SpectralCurve spectrum_curve(const StateSpaceModel& m, std::span<const double> grid) {
    if (grid.empty()) {
        throw DomainError("spectral", "frequency grid must be nonempty");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw DomainError("spectral", "frequency grid must be strictly increasing");
        }
    }
    SpectralCurve curve;
    curve.omega.assign(grid.begin(), grid.end());
    curve.gain_sq.reserve(grid.size());
    for (const double w : grid) curve.gain_sq.push_back(std::norm(resolvent_gain(m, w)));
    return curve;
}

} // namespace veh
