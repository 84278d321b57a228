#include <doctest.h>

#include <cmath>
#include <limits>

#include "veh/nelder_mead.hpp"

using namespace veh;

TEST_CASE("Rosenbrock") {
    const auto rosen = [](std::span<const double> x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    NelderMeadOptions o;
    o.tol = 1e-9;
    o.max_iterations = 5000;
    const NelderMeadResult r = nelder_mead(rosen, {-1.2, 1.0}, o);
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.value < 1e-12);
    REQUIRE_FALSE(r.trace.empty());
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].second <= r.trace[k - 1].second);
}

TEST_CASE("one-dimensional quadratic") {
    const auto f = [](std::span<const double> x) { return (x[0] - 3.0) * (x[0] - 3.0); };
    const NelderMeadResult r = nelder_mead(f, {0.0});
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("start at the minimum stays there") {
    const auto f = [](std::span<const double> x) { return x[0] * x[0] + 2.0 * x[1] * x[1]; };
    NelderMeadOptions o;
    o.initial_step = 1e-6;
    o.tol = 1e-5;
    const NelderMeadResult r = nelder_mead(f, {0.0, 0.0}, o);
    CHECK(r.converged);
    CHECK(r.iterations <= 3);
    CHECK(r.x[0] == 0.0);
    CHECK(r.x[1] == 0.0);
}

TEST_CASE("iteration cap returns the best point so far") {
    const auto f = [](std::span<const double> x) { return std::pow(x[0] - 10.0, 2) + std::pow(x[1] + 4.0, 2); };
    NelderMeadOptions o;
    o.max_iterations = 3;
    const NelderMeadResult r = nelder_mead(f, {0.0, 0.0}, o);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
    CHECK(r.value < f(std::vector<double>{0.0, 0.0}));
}

TEST_CASE("infinite values act as a barrier") {
    // minimum of the smooth part lies outside the admissible half-plane x0 > 1
    const auto f = [](std::span<const double> x) {
        if (x[0] <= 1.0) return std::numeric_limits<double>::infinity();
        return x[0] * x[0] + x[1] * x[1];
    };
    const NelderMeadResult r = nelder_mead(f, {3.0, 2.0});
    CHECK(std::isfinite(r.value));
    CHECK(r.x[0] > 1.0);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(r.x[1]) < 1e-4);
}

TEST_CASE("invalid input") {
    const auto f = [](std::span<const double> x) { return x[0]; };
    CHECK_THROWS(nelder_mead(f, {}));
    NelderMeadOptions o;
    o.initial_step = 0.0;
    CHECK_THROWS(nelder_mead(f, {1.0}, o));
    const auto inf = [](std::span<const double>) { return std::numeric_limits<double>::infinity(); };
    CHECK(std::isinf(nelder_mead(inf, {1.0}).value));
}
