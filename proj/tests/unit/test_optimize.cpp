#include <doctest.h>

#include <cmath>

#include "veh/errors.hpp"
#include "veh/lyapunov.hpp"
#include "veh/model.hpp"
#include "veh/optimize.hpp"

using namespace veh;

namespace {

HarvesterParams reference_params() { return HarvesterParams{0.01, 5.0, 0.01, 0.6, 10.0, 1.0}; }

} // namespace

TEST_CASE("grids") {
    const auto l = linspace(0.005, 1.0, 200);
    REQUIRE(l.size() == 200);
    CHECK(l.front() == 0.005);
    CHECK(l.back() == 1.0);
    const auto g = logspace(1.0, 1e4, 200);
    REQUIRE(g.size() == 200);
    CHECK(g.front() == 1.0);
    CHECK(g.back() == 1e4);
    for (std::size_t k = 1; k < g.size(); ++k) {
        CHECK(g[k] / g[k - 1] == doctest::Approx(std::pow(1e4, 1.0 / 199.0)).epsilon(1e-12));
    }
    CHECK(linspace(2.0, 2.0, 1) == std::vector<double>{2.0});
    CHECK_THROWS_AS(logspace(-1.0, 1.0, 3), DomainError);
    CHECK(linspace(0.0, 1.0, 0).empty());
}

TEST_CASE("single-cell sweep equals a direct evaluation") {
    const HarvesterParams p = reference_params();
    const SweepResult r = sweep(p, {0.1}, {900.0}, PowerEvaluator{});
    CHECK(r.J(0, 0) == mean_power(build_closed_loop(p, {0.1, 900.0}), p.W));
    CHECK_FALSE(r.has_failures());
    CHECK(r.argmax() == std::pair<std::size_t, std::size_t>{0, 0});
}

TEST_CASE("sweep is independent of the thread count") {
    const HarvesterParams p = reference_params();
    const auto km = linspace(0.1, 30.0, 13);
    const auto ke = logspace(0.5, 1e3, 11);
    const SweepResult a = sweep(p, km, ke, PowerEvaluator{}, 1);
    const SweepResult b = sweep(p, km, ke, PowerEvaluator{}, 4);
    CHECK((a.J.array() == b.J.array()).all());
}

TEST_CASE("scaling W scales J and keeps the argmax") {
    HarvesterParams p = reference_params();
    const auto km = linspace(1.0, 40.0, 17);
    const auto ke = logspace(0.01 + 1.0, 1e3, 15);
    const SweepResult base = sweep(p, km, ke, PowerEvaluator{});
    for (const double c : {0.5, 7.0}) {
        p.W = c;
        const SweepResult s = sweep(p, km, ke, PowerEvaluator{});
        CHECK(s.argmax() == base.argmax());
        const double worst = ((s.J - c * base.J).array().abs() / (c * base.J).array()).maxCoeff();
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("lyapunov and spectral sweeps agree") {
    const HarvesterParams p = reference_params();
    const auto km = std::vector<double>{0.1, 0.3, 0.5, 5.0, 24.0};
    const auto ke = std::vector<double>{-0.9, 1.0, 10.0, 900.0, 925.0, 950.0};
    PowerEvaluator spectral;
    spectral.method = EvalMethod::spectral;
    const SweepResult a = sweep(p, km, ke, PowerEvaluator{});
    const SweepResult b = sweep(p, km, ke, spectral);
    CHECK(((a.J - b.J).array().abs() / a.J.array()).maxCoeff() <= 1e-6);
}

TEST_CASE("failed cells are recorded and the sweep continues") {
    PowerEvaluator e;
    e.method = EvalMethod::spectral;
    e.quadrature.max_intervals = 1;
    const SweepResult r = sweep(reference_params(), {0.1, 0.3}, {900.0}, e);
    CHECK(r.has_failures());
    CHECK(r.failures.size() == 2);
    CHECK(std::isnan(r.J(0, 0)));
    CHECK_FALSE(r.failures[0].message.empty());
}

TEST_CASE("infeasible grids are rejected") {
    CHECK_THROWS_AS(sweep(reference_params(), {0.0}, {1.0}, PowerEvaluator{}), InfeasibleGainsError);
    CHECK_THROWS_AS(sweep(reference_params(), {1.0}, {-1.0}, PowerEvaluator{}), InfeasibleGainsError);
    CHECK_THROWS_AS(sweep(reference_params(), {}, {1.0}, PowerEvaluator{}), DomainError);
}

TEST_CASE("argmax tie-breaking") {
    SweepResult r;
    r.km_values = {1.0, 2.0};
    r.ke_values = {1.0, 2.0, 3.0};
    r.J = Eigen::MatrixXd::Zero(2, 3);
    r.J(0, 2) = 5.0;
    r.J(1, 0) = 5.0;
    r.J(1, 1) = NAN;
    CHECK(r.argmax() == std::pair<std::size_t, std::size_t>{0, 2});
    CHECK(r.argmax_over_ke(1) == 0);
    CHECK(r.argmax_over_km(2) == 0);
}

TEST_CASE("one-dimensional slice matches a dense grid") {
    // at fixed K_e = 925 the K_m profile has an interior maximum near lambda^2 - 1
    const HarvesterParams p = reference_params();
    const auto km = logspace(1.0, 100.0, 4001);
    const SweepResult grid = sweep(p, km, {925.0}, PowerEvaluator{});
    const std::size_t i = grid.argmax_over_km(0);
    REQUIRE(i > 0);
    REQUIRE(i + 1 < km.size());

    OptimOptions o;
    o.fixed_ke = 925.0;
    o.starts = 1;
    const OptimResult r = maximize_gains(p, {10.0, 925.0}, o);
    CHECK(r.converged);
    CHECK(r.gains_star.K_e == doctest::Approx(925.0).epsilon(1e-14));
    MESSAGE("slice optimum K_m=" << r.gains_star.K_m << ", grid argmax " << km[i]);
    CHECK(r.gains_star.K_m >= km[i - 1]);
    CHECK(r.gains_star.K_m <= km[i + 1]);
    CHECK(r.J_star >= grid.J(static_cast<Eigen::Index>(i), 0) * (1.0 - 1e-12));

    SUBCASE("restarting at the optimum stays put") {
        OptimOptions again = o;
        again.initial_step = 1e-3;
        const OptimResult s = maximize_gains(p, r.gains_star, again);
        CHECK(s.converged);
        CHECK(s.iterations <= 30);
        CHECK(s.gains_star.K_m == doctest::Approx(r.gains_star.K_m).epsilon(1e-6));
    }
}

TEST_CASE("two-dimensional search from the reference gains") {
    const HarvesterParams p = reference_params();
    const OptimResult r = maximize_gains(p, {0.3, 925.0});
    MESSAGE("K_m*=" << r.gains_star.K_m << " K_e*=" << r.gains_star.K_e << " J*=" << r.J_star);
    CHECK(validate_gains(r.gains_star));
    CHECK(is_hurwitz(build_closed_loop(p, r.gains_star)).stable);
    CHECK(r.starts.size() == 5);
    CHECK(r.starts.front().init == ControlGains{0.3, 925.0});
    for (const TracePoint& t : r.trace) {
        CHECK(r.J_star >= t.J);
        CHECK(validate_gains(t.gains));
        CHECK(is_hurwitz(build_closed_loop(p, t.gains)).stable);
    }
    for (const StartRecord& s : r.starts) CHECK(r.J_star >= s.J_star);
    CHECK(r.J_star == doctest::Approx(mean_power(build_closed_loop(p, r.gains_star), p.W)).epsilon(1e-14));
    // well above the starting point
    CHECK(r.J_star > mean_power(build_closed_loop(p, {0.3, 925.0}), p.W));
}

TEST_CASE("iteration cap") {
    OptimOptions o;
    o.max_iterations = 3;
    o.starts = 1;
    const OptimResult r = maximize_gains(reference_params(), {0.3, 925.0}, o);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
    CHECK(r.J_star >= mean_power(build_closed_loop(reference_params(), {0.3, 925.0}), 1.0));
}

TEST_CASE("argument checks") {
    CHECK_THROWS_AS(maximize_gains(reference_params(), {0.0, 1.0}), InfeasibleGainsError);
    OptimOptions o;
    o.fixed_km = 1.0;
    o.fixed_ke = 1.0;
    CHECK_THROWS_AS(maximize_gains(reference_params(), {1.0, 1.0}, o), DomainError);
    o = {};
    o.starts = 0;
    CHECK_THROWS_AS(maximize_gains(reference_params(), {1.0, 1.0}, o), DomainError);
}

TEST_CASE("log coordinates") {
    const ControlGains g = gains_from_log(std::log(0.3), std::log1p(925.0));
    CHECK(g.K_m == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(g.K_e == doctest::Approx(925.0).epsilon(1e-14));
    CHECK(gains_from_log(0.0, -40.0).K_e == -1.0);  // rounds onto the excluded boundary
    CHECK_FALSE(validate_gains(gains_from_log(0.0, -40.0)));
}
