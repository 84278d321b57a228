#include "veh/validate.hpp"

#include <cmath>
#include <sstream>

#include "veh/csv.hpp"
#include "veh/errors.hpp"
#include "veh/lyapunov.hpp"
#include "veh/sim.hpp"
#include "veh/spectral.hpp"

namespace veh {

namespace {

double log_uniform(GaussianRng& rng, double lo, double hi) {
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
}

template <class F>
CheckOutcome guarded(const std::string& name, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        return {name, false, std::string("error in ") + e.module() + ": " + e.what()};
    }
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

bool ValidationReport::all_passed() const noexcept {
    for (const CheckOutcome& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

std::string ValidationReport::table() const {
    std::ostringstream os;
    std::size_t width = 0;
    for (const CheckOutcome& c : checks) width = std::max(width, c.name.size());
    for (const CheckOutcome& c : checks) {
        os << (c.passed ? "PASS" : "FAIL") << "  " << c.name
           << std::string(width - c.name.size() + 2, ' ') << c.detail << '\n';
    }
    std::size_t passed = 0;
    for (const CheckOutcome& c : checks) passed += c.passed ? 1 : 0;
    os << passed << "/" << checks.size() << " checks passed\n";
    return os.str();
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const CheckOutcome& c : checks) {
        arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    return {{"all_passed", all_passed()}, {"checks", arr}};
}

RandomPlant draw_random_plant(GaussianRng& rng) {
    RandomPlant d;
    d.params.lambda = log_uniform(rng, 0.1, 10.0);
    d.params.zeta_s = log_uniform(rng, 1e-3, 1.0);
    d.params.zeta_h = log_uniform(rng, 1e-3, 1.0);
    d.params.kappa = 2.0 * rng.uniform();
    d.params.alpha = log_uniform(rng, 0.1, 100.0);
    d.params.W = 1.0;
    d.gains.K_m = log_uniform(rng, 1e-6, 1e3);
    d.gains.K_e = log_uniform(rng, 1e-6, 1e4 + 1.0) - 1.0;
    return d;
}

ValidationReport run_validation(const RunConfig& config) {
    ValidationReport report;
    const HarvesterParams& p = config.params;
    const ValidateConfig& v = config.validate;

    for (const ControlGains& g : v.gain_pairs) {
        const std::string name = "cross_method K_m=" + format_sci(g.K_m) + " K_e=" + format_sci(g.K_e);
        report.checks.push_back(guarded(name, [&] {
            const StateSpaceModel m = build_closed_loop(p, g);
            const double jl = mean_power(m, p.W);
            const double js = harvested_power_spectral(m, p.W, config.quadrature).J;
            const double rd = rel_diff(js, jl);
            return CheckOutcome{name, rd <= v.cross_method_rel_tol,
                                "J_lyapunov=" + format_sci(jl) + " J_spectral=" + format_sci(js) +
                                    " rel=" + format_sci(rd)};
        }));
    }

    report.checks.push_back(guarded("lyapunov_scalar_oracle", [&] {
        const double a = 0.7;
        const double W = 1.3;
        const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, -a);
        const Eigen::MatrixXd Q = Eigen::MatrixXd::Constant(1, 1, W);
        const double err = std::abs(solve_stationary_covariance(A, Q).P(0, 0) - W / (2.0 * a));
        return CheckOutcome{"lyapunov_scalar_oracle", err <= 1e-12, "abs_err=" + format_sci(err)};
    }));

    // x'' + 2 zeta x' + x = xi, output x.
    const double zeta = 0.05;
    const double W2 = 1.0;
    Eigen::MatrixXd A2(2, 2);
    A2 << 0.0, 1.0, -1.0, -2.0 * zeta;
    Eigen::VectorXd B2(2);
    B2 << 0.0, 1.0;
    Eigen::RowVectorXd C2(2);
    C2 << 1.0, 0.0;
    const double var_exact = W2 / (4.0 * zeta);

    report.checks.push_back(guarded("lyapunov_oscillator_oracle", [&] {
        const Eigen::MatrixXd P = solve_stationary_covariance(A2, W2 * B2 * B2.transpose()).P;
        const double err = std::max({std::abs(P(0, 0) - var_exact), std::abs(P(1, 1) - var_exact),
                                     std::abs(P(0, 1))});
        return CheckOutcome{"lyapunov_oscillator_oracle", err <= 1e-12, "abs_err=" + format_sci(err)};
    }));

    report.checks.push_back(guarded("spectral_normalization", [&] {
        const double J = harvested_power_spectral(A2, B2, C2, W2, config.quadrature).J;
        const double rd = rel_diff(J, var_exact);
        return CheckOutcome{"spectral_normalization", rd <= 1e-8, "rel=" + format_sci(rd)};
    }));

    if (config.gains) {
        report.checks.push_back(guarded("lyapunov_linearity_in_W", [&] {
            const StateSpaceModel m = build_closed_loop(p, *config.gains);
            const double j1 = mean_power(m, 1.0);
            const double j3 = mean_power(m, 3.0);
            const double rd = rel_diff(j3, 3.0 * j1);
            return CheckOutcome{"lyapunov_linearity_in_W", rd <= 1e-12, "rel=" + format_sci(rd)};
        }));
    }

    report.checks.push_back(guarded("monte_carlo_consistency", [&] {
        const StateSpaceModel m = build_closed_loop(p, v.mc_gains);
        const double jl = mean_power(m, p.W);
        SimOptions o;
        o.h = v.mc_h;
        o.n_steps = v.mc_steps;
        o.seed = config.simulate.seed;
        const std::vector<PowerEstimate> runs = simulate_power_ensemble(m, p.W, o, v.mc_seeds);
        std::size_t within = 0;
        double worst = 0.0;
        for (const PowerEstimate& e : runs) {
            const double z = std::abs(e.mean - jl) / e.std_error;
            worst = std::max(worst, z);
            within += z <= 3.0 ? 1 : 0;
        }
        const auto needed = static_cast<std::size_t>(std::floor(0.95 * static_cast<double>(runs.size())));
        return CheckOutcome{"monte_carlo_consistency", within >= needed,
                            std::to_string(within) + "/" + std::to_string(runs.size()) +
                                " within 3 SE (need " + std::to_string(needed) +
                                "), max |z|=" + format_sci(worst)};
    }));

    report.checks.push_back(guarded("closed_loop_stability", [&] {
        GaussianRng rng(v.stability_seed);
        std::size_t stable = 0;
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < v.stability_draws; ++k) {
            const RandomPlant d = draw_random_plant(rng);
            const StabilityReport s = is_hurwitz(build_closed_loop(d.params, d.gains));
            stable += s.stable ? 1 : 0;
            worst = std::max(worst, s.margin);
        }
        return CheckOutcome{"closed_loop_stability", stable == v.stability_draws,
                            std::to_string(stable) + "/" + std::to_string(v.stability_draws) +
                                " Hurwitz, worst margin=" + format_sci(worst)};
    }));

    report.checks.push_back(guarded("simulation_determinism", [&] {
        const StateSpaceModel m = build_closed_loop(p, v.mc_gains);
        const Trajectory a = simulate(m, p.W, v.mc_h, 2000, config.simulate.seed);
        const Trajectory b = simulate(m, p.W, v.mc_h, 2000, config.simulate.seed);
        bool same = a.states.size() == b.states.size();
        for (std::size_t k = 0; same && k < a.states.size(); ++k) same = a.states[k] == b.states[k];
        return CheckOutcome{"simulation_determinism", same, same ? "identical" : "trajectories differ"};
    }));

    return report;
}

} // namespace veh
