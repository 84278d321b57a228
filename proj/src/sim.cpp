#include "veh/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "veh/csv.hpp"
#include "veh/errors.hpp"
#include "veh/rng.hpp"

namespace veh {

namespace {

// Lower-triangular factor of Q_d. Q_d is close to rank one for small h, so a
// small diagonal shift (1e-15 trace, escalated if needed) is added first.
Matrix5 noise_factor(const Matrix5& Q) {
    const double tr = Q.trace();
    if (tr == 0.0) return Matrix5::Zero();
    for (double jitter = 1e-15; jitter <= 1e-9; jitter *= 10.0) {
        const Eigen::LLT<Matrix5> llt(Q + jitter * tr * Matrix5::Identity());
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw NumericError("sim", "Cholesky factorization of the step covariance failed");
}

class Stepper {
public:
    Stepper(const StateSpaceModel& m, double W, double h, Scheme scheme, std::uint64_t seed)
        : rng_(seed) {
        const Discretization d = discretize(m, h, W, scheme);
        A_d_ = d.A_d;
        L_ = noise_factor(d.Q_d);
        x_.setZero();
    }

    const Vector5& state() const { return x_; }

    void step() {
        Vector5 z;
        for (int i = 0; i < kStates; ++i) z(i) = rng_.normal();
        x_ = A_d_ * x_ + L_.triangularView<Eigen::Lower>() * z;
    }

private:
    GaussianRng rng_;
    Matrix5 A_d_;
    Matrix5 L_;
    Vector5 x_;
};

class BatchMeans {
public:
    BatchMeans(std::size_t total, double burn_in, std::size_t batches) : batches_(batches) {
        if (!(burn_in >= 0.0 && burn_in <= 0.9)) {
            throw ConfigError("sim", "burn_in fraction must lie in [0, 0.9]");
        }
        if (batches < kMinBatches) {
            throw ConfigError("sim", "at least " + std::to_string(kMinBatches) + " batches required");
        }
        const auto dropped = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(total)));
        const std::size_t kept = total - dropped;
        batch_size_ = kept / batches;
        if (batch_size_ == 0) {
            throw ConfigError("sim", "trajectory too short: " + std::to_string(kept) +
                                         " retained samples for " + std::to_string(batches) +
                                         " batches");
        }
        burn_in_ = dropped + kept % batches;
        means_.reserve(batches);
    }

    void push(double value) {
        if (seen_++ < burn_in_) return;
        sum_ += value;
        if (++in_batch_ == batch_size_) {
            means_.push_back(sum_ / static_cast<double>(batch_size_));
            sum_ = 0.0;
            in_batch_ = 0;
        }
    }

    PowerEstimate finish() const {
        PowerEstimate e;
        e.batches = batches_;
        e.burn_in_steps = burn_in_;
        e.samples = batch_size_ * batches_;
        double total = 0.0;
        for (const double m : means_) total += m;
        e.mean = total / static_cast<double>(batches_);
        double ss = 0.0;
        for (const double m : means_) ss += (m - e.mean) * (m - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(batches_ * (batches_ - 1)));
        return e;
    }

private:
    std::size_t batches_;
    std::size_t batch_size_ = 0;
    std::size_t burn_in_ = 0;
    std::size_t seen_ = 0;
    std::size_t in_batch_ = 0;
    double sum_ = 0.0;
    std::vector<double> means_;
};

void require_step(double h, std::size_t n_steps) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("sim", "step h must be > 0");
    if (n_steps < 1) throw DomainError("sim", "n_steps must be >= 1");
}

} // namespace

const char* to_string(Scheme s) noexcept {
    return s == Scheme::exact ? "exact" : "euler_maruyama";
}

Discretization discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q, double h,
                          Scheme scheme) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || Q.rows() != n || Q.cols() != n) {
        throw DomainError("sim", "A and Q must be square of equal size");
    }
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("sim", "step h must be > 0");

    Discretization d;
    if (scheme == Scheme::euler_maruyama) {
        d.A_d = Eigen::MatrixXd::Identity(n, n) + A * h;
        d.Q_d = Q * h;
        return d;
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    M.topLeftCorner(n, n) = -A * h;
    M.topRightCorner(n, n) = Q * h;
    M.bottomRightCorner(n, n) = A.transpose() * h;
    const Eigen::MatrixXd E = M.exp();
    if (!E.allFinite()) {
        throw NumericError("sim", "matrix exponential did not produce finite values");
    }
    d.A_d = E.bottomRightCorner(n, n).transpose();
    d.Q_d = d.A_d * E.topRightCorner(n, n);
    d.Q_d = 0.5 * (d.Q_d + d.Q_d.transpose()).eval();
    return d;
}

Discretization discretize(const StateSpaceModel& m, double h, double W, Scheme scheme) {
    if (!(W >= 0.0) || !std::isfinite(W)) throw DomainError("sim", "noise intensity W must be >= 0");
    const StabilityReport stab = is_hurwitz(m);
    if (!stab.stable) {
        throw UnstableError("sim", "A is not Hurwitz (max real eigenvalue part " +
                                       std::to_string(stab.margin) + ")");
    }
    const Eigen::MatrixXd Q = W * m.B_xi * m.B_xi.transpose();
    return discretize(Eigen::MatrixXd(m.A), Q, h, scheme);
}

Trajectory simulate(const StateSpaceModel& m, double W, double h, std::size_t n_steps,
                    std::uint64_t seed, Scheme scheme) {
    require_step(h, n_steps);
    Stepper stepper(m, W, h, scheme, seed);
    Trajectory t;
    t.step = h;
    t.seed = seed;
    t.scheme = scheme;
    t.params = m.params;
    t.gains = m.gains;
    t.W = W;
    t.states.reserve(n_steps + 1);
    t.states.push_back(stepper.state());
    for (std::size_t k = 0; k < n_steps; ++k) {
        stepper.step();
        t.states.push_back(stepper.state());
    }
    if (!t.states.back().allFinite()) {
        throw NumericError("sim", "trajectory diverged to non-finite values");
    }
    return t;
}

PowerEstimate estimate_power(const Trajectory& t, double burn_in, std::size_t batches) {
    BatchMeans acc(t.states.size(), burn_in, batches);
    for (const Vector5& x : t.states) acc.push(x(4) * x(4));
    return acc.finish();
}

PowerEstimate simulate_power(const StateSpaceModel& m, double W, const SimOptions& opts) {
    require_step(opts.h, opts.n_steps);
    BatchMeans acc(opts.n_steps + 1, opts.burn_in, opts.batches);
    Stepper stepper(m, W, opts.h, opts.scheme, opts.seed);
    acc.push(stepper.state()(4) * stepper.state()(4));
    for (std::size_t k = 0; k < opts.n_steps; ++k) {
        stepper.step();
        const double v = stepper.state()(4);
        acc.push(v * v);
    }
    if (!stepper.state().allFinite()) {
        throw NumericError("sim", "trajectory diverged to non-finite values");
    }
    return acc.finish();
}

std::vector<PowerEstimate> simulate_power_ensemble(const StateSpaceModel& m, double W,
                                                   const SimOptions& opts, std::size_t members,
                                                   unsigned threads) {
    std::vector<PowerEstimate> out(members);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(members, 1)));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < members; i = next++) {
            try {
                SimOptions o = opts;
                o.seed = derive_seed(opts.seed, i);
                out[i] = simulate_power(m, W, o);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

EnergyAudit energy_audit(const Trajectory& t, const HarvesterParams& p, const ControlGains& g) {
    if (!t.gains || !(*t.gains == g) || t.params.alpha != p.alpha) {
        throw ConfigError("sim", "trajectory was not generated by the closed loop with these gains");
    }
    if (t.states.size() < 2) throw ConfigError("sim", "energy audit needs at least two samples");

    const double h = t.step;
    const auto mech_power = [&](const Vector5& x) { return -g.K_m * x(2) * x(3); };
    const auto elec_power = [&](const Vector5& x) {
        const double vdot = (x(3) - p.alpha * x(4)) / (1.0 + g.K_e);
        return -g.K_e * vdot * x(4);
    };

    double mech_work = 0.0;
    double elec_work = 0.0;
    EnergyAudit a;
    for (std::size_t k = 0; k + 1 < t.states.size(); ++k) {
        const double m0 = mech_power(t.states[k]);
        const double m1 = mech_power(t.states[k + 1]);
        const double e0 = elec_power(t.states[k]);
        const double e1 = elec_power(t.states[k + 1]);
        mech_work += 0.5 * h * (m0 + m1);
        elec_work += 0.5 * h * (e0 + e1);
        a.mech_scale += 0.5 * h * (std::abs(m0) + std::abs(m1));
        a.elec_scale += 0.5 * h * (std::abs(e0) + std::abs(e1));
    }
    const Vector5& first = t.states.front();
    const Vector5& last = t.states.back();
    const double mech_storage = 0.5 * g.K_m * (last(2) * last(2) - first(2) * first(2));
    const double elec_storage = 0.5 * g.K_e * (last(4) * last(4) - first(4) * first(4));
    a.mech_abs = std::abs(mech_work + mech_storage);
    a.elec_abs = std::abs(elec_work + elec_storage);
    a.mech_residual = a.mech_scale > 0.0 ? a.mech_abs / a.mech_scale : 0.0;
    a.elec_residual = a.elec_scale > 0.0 ? a.elec_abs / a.elec_scale : 0.0;
    return a;
}

Trajectory decimate(const Trajectory& t, std::size_t factor) {
    if (factor == 0) throw DomainError("sim", "decimation factor must be >= 1");
    Trajectory out = t;
    out.step = t.step * static_cast<double>(factor);
    out.states.clear();
    for (std::size_t k = 0; k < t.states.size(); k += factor) out.states.push_back(t.states[k]);
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
    os << "# seed=" << t.seed << "\n";
    os << "# h=" << format_sci(t.step) << "\n";
    os << "# scheme=" << to_string(t.scheme) << "\n";
    os << "# generator=" << kGeneratorName << "\n";
    os << "# zeta_s=" << format_sci(t.params.zeta_s) << " lambda=" << format_sci(t.params.lambda)
       << " zeta_h=" << format_sci(t.params.zeta_h) << " kappa=" << format_sci(t.params.kappa)
       << " alpha=" << format_sci(t.params.alpha) << " W=" << format_sci(t.W) << "\n";
    if (t.gains) {
        os << "# K_m=" << format_sci(t.gains->K_m) << " K_e=" << format_sci(t.gains->K_e) << "\n";
    }
    os << "t,x_s,dx_s,x_h,dx_h,v\n";
    for (std::size_t k = 0; k < t.states.size(); ++k) {
        os << format_sci(static_cast<double>(k) * t.step);
        for (int i = 0; i < kStates; ++i) os << ',' << format_sci(t.states[k](i));
        os << '\n';
    }
}

} // namespace veh
