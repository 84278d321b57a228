#include "veh/model.hpp"

#include <cmath>
#include <string>

#include "veh/errors.hpp"

namespace veh {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError("model", std::string(name) + " must be finite and > 0, got " +
                                       std::to_string(value));
    }
}

void require_nonnegative(double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw DomainError("model", std::string(name) + " must be finite and >= 0, got " +
                                       std::to_string(value));
    }
}

} // namespace

double PhysicalParams::omega_s() const { return std::sqrt(k_s / m_s); }
double PhysicalParams::omega_h() const { return std::sqrt(k_h / m_h); }

void PhysicalParams::validate() const {
    require_positive(m_s, "m_s");
    require_positive(m_h, "m_h");
    require_positive(k_s, "k_s");
    require_positive(k_h, "k_h");
    require_positive(C_p, "C_p");
    require_positive(R, "R");
    require_positive(l_c, "l_c");
    require_nonnegative(c_s, "c_s");
    require_nonnegative(c_h, "c_h");
    require_nonnegative(theta, "theta");
}

void HarvesterParams::validate() const {
    require_positive(zeta_s, "zeta_s");
    require_positive(zeta_h, "zeta_h");
    validate_structure();
}

void HarvesterParams::validate_structure() const {
    require_nonnegative(zeta_s, "zeta_s");
    require_nonnegative(zeta_h, "zeta_h");
    require_positive(lambda, "lambda");
    require_nonnegative(kappa, "kappa");
    require_positive(alpha, "alpha");
    require_nonnegative(W, "W");
}

bool validate_gains(const ControlGains& g) noexcept {
    return g.K_m > 0.0 && g.K_e > -1.0 && std::isfinite(g.K_m) && std::isfinite(g.K_e);
}

void require_feasible(const ControlGains& g) {
    if (!(g.K_m > 0.0) || !std::isfinite(g.K_m)) {
        throw InfeasibleGainsError("model", "infeasible gains: K_m must satisfy K_m > 0, got " +
                                                std::to_string(g.K_m));
    }
    if (!(g.K_e > -1.0) || !std::isfinite(g.K_e)) {
        throw InfeasibleGainsError("model", "infeasible gains: K_e must satisfy K_e > -1, got " +
                                                std::to_string(g.K_e));
    }
}

HarvesterParams nondimensionalize(const PhysicalParams& phys, double W_dim) {
    phys.validate();
    require_nonnegative(W_dim, "W");
    const double omega_h = phys.omega_h();
    HarvesterParams p;
    p.zeta_s = phys.c_s / (2.0 * std::sqrt(phys.k_s * phys.m_s));
    p.zeta_h = phys.c_h / (2.0 * std::sqrt(phys.k_h * phys.m_h));
    p.lambda = phys.omega_s() / omega_h;
    p.kappa = phys.theta / std::sqrt(phys.C_p * phys.k_h);
    p.alpha = 1.0 / (phys.R * phys.C_p * omega_h);
    p.W = W_dim;
    return p;
}

double dimensional_power(double J, const PhysicalParams& phys) {
    if (!(J >= 0.0)) {
        throw DomainError("model", "nondimensional power must be >= 0, got " + std::to_string(J));
    }
    phys.validate();
    const double omega_h = phys.omega_h();
    const HarvesterParams p = nondimensionalize(phys, 0.0);
    return phys.m_h * omega_h * omega_h * omega_h * phys.l_c * phys.l_c * p.alpha * p.kappa *
           p.kappa * J;
}

StateSpaceModel build_open_loop(const HarvesterParams& p) {
    p.validate_structure();
    const double l2 = p.lambda * p.lambda;
    const double cs = 2.0 * p.zeta_s * p.lambda;

    StateSpaceModel m;
    m.params = p;
    m.A << 0.0, 1.0, 0.0, 0.0, 0.0,
           -l2, -cs, 0.0, 0.0, 0.0,
           0.0, 0.0, 0.0, 1.0, 0.0,
           l2, cs, -1.0, -2.0 * p.zeta_h, -p.kappa * p.kappa,
           0.0, 0.0, 0.0, 1.0, -p.alpha;
    m.B_xi << 0.0, 1.0, 0.0, -1.0, 0.0;
    m.C << 0.0, 0.0, 0.0, 0.0, 1.0;
    return m;
}

StateSpaceModel build_closed_loop(const HarvesterParams& p, const ControlGains& g) {
    require_feasible(g);
    StateSpaceModel m = build_open_loop(p);
    const double cap = 1.0 + g.K_e;
    m.A(3, 2) = -(1.0 + g.K_m);
    m.A(4, 3) = 1.0 / cap;
    m.A(4, 4) = -p.alpha / cap;
    m.gains = g;
    return m;
}

StabilityReport is_hurwitz(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols() || A.rows() == 0) {
        throw DomainError("model", "is_hurwitz needs a nonempty square matrix");
    }
    if (!A.allFinite()) {
        throw NumericError("model", "matrix has non-finite entries");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) {
        throw NumericError("model", "eigenvalue computation failed");
    }
    StabilityReport r;
    r.margin = es.eigenvalues().real().maxCoeff();
    r.stable = r.margin < -kStabilityThreshold;
    return r;
}

StabilityReport is_hurwitz(const StateSpaceModel& m) { return is_hurwitz(Eigen::MatrixXd(m.A)); }

} // namespace veh
