#include "veh/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "veh/errors.hpp"
#include "veh/lyapunov.hpp"
#include "veh/nelder_mead.hpp"

namespace veh {

const char* to_string(EvalMethod m) noexcept {
    return m == EvalMethod::lyapunov ? "lyapunov" : "spectral";
}

const char* to_string(TransferMode m) noexcept {
    return m == TransferMode::statespace ? "statespace" : "paper";
}

double PowerEvaluator::operator()(const HarvesterParams& p, const ControlGains& g) const {
    if (method == EvalMethod::spectral && transfer == TransferMode::paper) {
        require_feasible(g);
        return harvested_power_paper_literal(p, g, p.W, quadrature).J;
    }
    const StateSpaceModel m = build_closed_loop(p, g);
    if (method == EvalMethod::lyapunov) return mean_power(m, p.W);
    return harvested_power_spectral(m, p.W, quadrature).J;
}

std::pair<std::size_t, std::size_t> SweepResult::argmax() const {
    std::pair<std::size_t, std::size_t> best{0, 0};
    double best_value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < J.rows(); ++i) {
        for (Eigen::Index j = 0; j < J.cols(); ++j) {
            if (std::isfinite(J(i, j)) && J(i, j) > best_value) {
                best_value = J(i, j);
                best = {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
            }
        }
    }
    return best;
}

std::size_t SweepResult::argmax_over_ke(std::size_t i) const {
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < J.cols(); ++j) {
        const double v = J(static_cast<Eigen::Index>(i), j);
        if (std::isfinite(v) && v > best_value) {
            best_value = v;
            best = static_cast<std::size_t>(j);
        }
    }
    return best;
}

std::size_t SweepResult::argmax_over_km(std::size_t j) const {
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < J.rows(); ++i) {
        const double v = J(i, static_cast<Eigen::Index>(j));
        if (std::isfinite(v) && v > best_value) {
            best_value = v;
            best = static_cast<std::size_t>(i);
        }
    }
    return best;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    out.back() = hi;
    return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > 0.0)) throw DomainError("optimize", "logspace bounds must be > 0");
    std::vector<double> out = linspace(std::log(lo), std::log(hi), n);
    for (double& v : out) v = std::exp(v);
    if (n > 0) {
        out.front() = lo;
        out.back() = hi;
    }
    return out;
}

SweepResult sweep(const HarvesterParams& p, const std::vector<double>& km_grid,
                  const std::vector<double>& ke_grid, const PowerEvaluator& evaluator,
                  unsigned threads) {
    if (km_grid.empty() || ke_grid.empty()) {
        throw DomainError("optimize", "sweep grids must be nonempty");
    }
    for (const double km : km_grid) require_feasible({km, 0.0});
    for (const double ke : ke_grid) require_feasible({1.0, ke});

    SweepResult r;
    r.km_values = km_grid;
    r.ke_values = ke_grid;
    r.method = evaluator.method;
    r.transfer = evaluator.transfer;
    const std::size_t rows = km_grid.size();
    const std::size_t cols = ke_grid.size();
    r.J = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols),
                                    std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> errors(rows * cols);

    const std::size_t cells = rows * cols;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells));
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t c = next++; c < cells; c = next++) {
            const std::size_t i = c / cols;
            const std::size_t j = c % cols;
            try {
                const double v = evaluator(p, {km_grid[i], ke_grid[j]});
                if (!std::isfinite(v) || v < 0.0) {
                    errors[c] = "non-finite or negative power";
                } else {
                    r.J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                }
            } catch (const std::exception& e) {
                errors[c] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (std::size_t c = 0; c < cells; ++c) {
        if (!errors[c].empty()) r.failures.push_back({c / cols, c % cols, errors[c]});
    }
    return r;
}

ControlGains gains_from_log(double a, double b) noexcept { return {std::exp(a), std::expm1(b)}; }

std::vector<ControlGains> lattice_starts() {
    return {{0.1, 0.0}, {10.0, 0.0}, {0.1, 100.0}, {10.0, 100.0}};
}

namespace {

StartRecord run_start(const HarvesterParams& p, const ControlGains& init, const OptimOptions& opts,
                      std::vector<TracePoint>& trace) {
    const PowerEvaluator& eval = opts.evaluator;
    const auto objective_at = [&](const ControlGains& g) {
        if (!validate_gains(g)) return std::numeric_limits<double>::infinity();
        try {
            if (!is_hurwitz(build_closed_loop(p, g)).stable) {
                return std::numeric_limits<double>::infinity();
            }
            return -eval(p, g);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    const double a0 = std::log(init.K_m);
    const double b0 = std::log1p(init.K_e);
    // Map the free coordinates back onto (a, b).
    const auto to_gains = [&](std::span<const double> x) {
        if (opts.fixed_km) return gains_from_log(std::log(*opts.fixed_km), x[0]);
        if (opts.fixed_ke) return gains_from_log(x[0], std::log1p(*opts.fixed_ke));
        return gains_from_log(x[0], x[1]);
    };
    std::vector<double> x0;
    if (opts.fixed_km) {
        x0 = {b0};
    } else if (opts.fixed_ke) {
        x0 = {a0};
    } else {
        x0 = {a0, b0};
    }

    NelderMeadOptions nm;
    nm.initial_step = opts.initial_step;
    nm.tol = opts.tol;
    nm.max_iterations = opts.max_iterations;
    const NelderMeadResult res =
        nelder_mead([&](std::span<const double> x) { return objective_at(to_gains(x)); }, x0, nm);

    trace.clear();
    trace.reserve(res.trace.size());
    for (const auto& [x, f] : res.trace) trace.push_back({to_gains(x), -f});

    StartRecord s;
    s.init = init;
    s.gains_star = to_gains(res.x);
    s.J_star = -res.value;
    s.iterations = res.iterations;
    s.converged = res.converged;
    return s;
}

} // namespace

OptimResult maximize_gains(const HarvesterParams& p, const ControlGains& init,
                           const OptimOptions& opts) {
    require_feasible(init);
    if (opts.fixed_km && opts.fixed_ke) {
        throw DomainError("optimize", "at most one gain can be held fixed");
    }
    if (opts.fixed_km) require_feasible({*opts.fixed_km, init.K_e});
    if (opts.fixed_ke) require_feasible({init.K_m, *opts.fixed_ke});
    if (opts.starts == 0) throw DomainError("optimize", "at least one start is required");

    std::vector<ControlGains> inits{init};
    for (const ControlGains& g : lattice_starts()) {
        if (inits.size() >= opts.starts) break;
        inits.push_back(g);
    }

    OptimResult best;
    best.J_star = -std::numeric_limits<double>::infinity();
    std::vector<TracePoint> trace;
    for (const ControlGains& g : inits) {
        const StartRecord s = run_start(p, g, opts, trace);
        best.starts.push_back(s);
        if (s.J_star > best.J_star) {
            best.J_star = s.J_star;
            best.gains_star = s.gains_star;
            best.iterations = s.iterations;
            best.converged = s.converged;
            best.trace = trace;
        }
    }
    if (!std::isfinite(best.J_star)) {
        throw NumericError("optimize", "no start produced a finite power value");
    }
    return best;
}

} // namespace veh
