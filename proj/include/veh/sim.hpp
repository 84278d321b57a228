#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "veh/model.hpp"

namespace veh {

enum class Scheme {
    exact,           ///< x_{k+1} = e^{A h} x_k + w_k, w_k ~ N(0, Q_d) with the exact Q_d
    euler_maruyama,  ///< x_{k+1} = (I + A h) x_k + w_k, w_k ~ N(0, B W B^T h)
};

struct Discretization {
    Eigen::MatrixXd A_d;
    Eigen::MatrixXd Q_d;  ///< symmetric PSD noise covariance over one step
};

/**
 * @brief One-step transition of x' = A x + noise with intensity Q.
 *
 * The exact scheme uses the Van Loan block exponential
 * exp([[-A, Q], [0, A^T]] h) = [[., G], [0, F]] giving A_d = F^T and
 * Q_d = F^T G. Throws NumericError if the exponential is not finite.
 */
Discretization discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q, double h,
                          Scheme scheme = Scheme::exact);

/// Model form: Q = B_xi W B_xi^T. Requires a Hurwitz A.
Discretization discretize(const StateSpaceModel& m, double h, double W,
                          Scheme scheme = Scheme::exact);

/// Sampled path x_0 = 0, x_1, ..., x_n of the five-state system.
struct Trajectory {
    double step = 0.0;
    std::vector<Vector5> states;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::exact;
    HarvesterParams params;
    std::optional<ControlGains> gains;
    double W = 0.0;
};

struct PowerEstimate {
    double mean = 0.0;
    double std_error = 0.0;         ///< batch-means standard error of `mean`
    std::size_t burn_in_steps = 0;  ///< leading samples discarded
    std::size_t samples = 0;        ///< samples entering the estimate
    std::size_t batches = 0;
};

inline constexpr double kDefaultBurnIn = 0.1;
inline constexpr std::size_t kDefaultBatches = 32;
inline constexpr std::size_t kMinBatches = 16;

struct SimOptions {
    double h = 0.01;
    std::size_t n_steps = 100000;
    std::uint64_t seed = 42;
    Scheme scheme = Scheme::exact;
    double burn_in = kDefaultBurnIn;
    std::size_t batches = kDefaultBatches;
};

/// Stores every state; use simulate_power for long runs.
Trajectory simulate(const StateSpaceModel& m, double W, double h, std::size_t n_steps,
                    std::uint64_t seed, Scheme scheme = Scheme::exact);

/**
 * @brief Time average of v^2 with a batch-means standard error.
 *
 * The first floor(burn_in N) samples are dropped, plus the N mod batches
 * remainder so the retained samples split into equal batches. Throws
 * ConfigError unless burn_in is in [0, 0.9], batches >= 16 and each batch
 * holds at least one sample.
 */
PowerEstimate estimate_power(const Trajectory& t, double burn_in = kDefaultBurnIn,
                             std::size_t batches = kDefaultBatches);

/// Streaming equivalent of estimate_power(simulate(...)); bitwise identical, O(1) memory.
PowerEstimate simulate_power(const StateSpaceModel& m, double W, const SimOptions& opts);

/// Independent runs with seeds derive_seed(opts.seed, i); results are indexed by member.
std::vector<PowerEstimate> simulate_power_ensemble(const StateSpaceModel& m, double W,
                                                   const SimOptions& opts, std::size_t members,
                                                   unsigned threads = 0);

struct EnergyAudit {
    double mech_residual = 0.0;  ///< |int u_m x_h' dt + Delta(K_m x_h^2 / 2)| / mech_scale
    double elec_residual = 0.0;  ///< |int u_e v dt + Delta(K_e v^2 / 2)| / elec_scale
    double mech_abs = 0.0;
    double elec_abs = 0.0;
    double mech_scale = 0.0;     ///< trapezoidal int |u_m x_h'| dt
    double elec_scale = 0.0;     ///< trapezoidal int |u_e v| dt
};

/**
 * @brief Checks the lossless storage identities of u_m = -K_m x_h and u_e = -K_e v'.
 *
 * Work integrals use the trapezoidal rule on the samples; v' comes from the
 * state equation (x_h' - alpha v) / (1 + K_e). Throws ConfigError if the
 * trajectory was not generated under `g`.
 */
EnergyAudit energy_audit(const Trajectory& t, const HarvesterParams& p, const ControlGains& g);

/// Every `factor`-th sample of `t`; for the exact scheme this is a valid path at step factor*h.
Trajectory decimate(const Trajectory& t, std::size_t factor);

/// CSV with '#' metadata lines and columns t, x_s, dx_s, x_h, dx_h, v.
void write_trajectory_csv(std::ostream& os, const Trajectory& t);

const char* to_string(Scheme s) noexcept;

} // namespace veh
