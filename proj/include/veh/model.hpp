#pragma once

#include <optional>

#include <Eigen/Dense>

namespace veh {

inline constexpr int kStates = 5;

using Matrix5 = Eigen::Matrix<double, kStates, kStates>;
using Vector5 = Eigen::Matrix<double, kStates, 1>;
using RowVector5 = Eigen::Matrix<double, 1, kStates>;

/// Largest eigenvalue real part still counted as stable is -kStabilityThreshold.
inline constexpr double kStabilityThreshold = 1e-9;

/**
 * @brief Dimensional description of the structure + piezo harvester.
 *
 * Units: masses [kg], stiffnesses [N/m], dampings [N*s/m], theta [N/V],
 * C_p [F], R [Ohm], l_c [m].
 */
struct PhysicalParams {
    double m_s = 1.0;
    double m_h = 1.0;
    double k_s = 1.0;
    double k_h = 1.0;
    double c_s = 0.0;
    double c_h = 0.0;
    double theta = 0.0;
    double C_p = 1.0;
    double R = 1.0;
    double l_c = 1.0;

    double omega_s() const;  ///< sqrt(k_s / m_s) [rad/s]
    double omega_h() const;  ///< sqrt(k_h / m_h) [rad/s]

    /// Throws DomainError if a positivity invariant is violated.
    void validate() const;
};

/**
 * @brief Nondimensional plant parameters plus the forcing intensity W.
 *
 * The structure is x_s'' + 2 zeta_s lambda x_s' + lambda^2 x_s = xi, the harvester
 * x_h'' + 2 zeta_h x_h' + x_h + kappa^2 v = -x_s'' + u_m and the voltage
 * v' + alpha v = x_h' + u_e. kappa is stored, kappa^2 enters the matrices.
 */
struct HarvesterParams {
    double zeta_s = 0.01;
    double lambda = 5.0;
    double zeta_h = 0.01;
    double kappa = 0.6;
    double alpha = 10.0;
    double W = 1.0;

    /// Strict invariants: zeta_s, zeta_h, lambda, alpha > 0; kappa, W >= 0.
    void validate() const;

    /// Structural requirements for building matrices; dampings may be zero.
    void validate_structure() const;
};

/// Passive feedback gains: u_m = -K_m x_h, u_e = -K_e v'.
struct ControlGains {
    double K_m = 0.0;
    double K_e = 0.0;

    friend bool operator==(const ControlGains&, const ControlGains&) = default;
};

/// True iff K_m > 0 and K_e > -1 (open set, no tolerance band).
bool validate_gains(const ControlGains& g) noexcept;

/// Throws InfeasibleGainsError with a message citing the violated bound.
void require_feasible(const ControlGains& g);

enum class Loop { open, closed };

/**
 * @brief x' = A x + B_xi xi, v = C x with state [x_s, x_s', x_h, x_h', v].
 *
 * For closed loops A holds A_K and `gains` records the feedback used.
 */
struct StateSpaceModel {
    Matrix5 A = Matrix5::Zero();
    Vector5 B_xi = Vector5::Zero();
    RowVector5 C = RowVector5::Zero();
    HarvesterParams params;
    std::optional<ControlGains> gains;

    Loop loop() const noexcept { return gains ? Loop::closed : Loop::open; }
};

/// Maps physical parameters onto the nondimensional set. W_dim is passed through.
HarvesterParams nondimensionalize(const PhysicalParams& phys, double W_dim);

/// Dimensional mean power [W] = m_h omega_h^3 l_c^2 alpha kappa^2 * J.
double dimensional_power(double J, const PhysicalParams& phys);

StateSpaceModel build_open_loop(const HarvesterParams& p);

/// Closed loop under u_m = -K_m x_h, u_e = -K_e v'. Rejects infeasible gains.
StateSpaceModel build_closed_loop(const HarvesterParams& p, const ControlGains& g);

struct StabilityReport {
    bool stable = false;
    double margin = 0.0;  ///< max real part over the spectrum of A
};

StabilityReport is_hurwitz(const Eigen::MatrixXd& A);
StabilityReport is_hurwitz(const StateSpaceModel& m);

} // namespace veh
