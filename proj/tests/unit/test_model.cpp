#include <doctest.h>

#include <cmath>
#include <complex>

#include "veh/errors.hpp"
#include "veh/model.hpp"
#include "veh/rng.hpp"
#include "veh/validate.hpp"

using namespace veh;

namespace {

HarvesterParams reference_params() {
    HarvesterParams p;
    p.lambda = 5.0;
    p.zeta_s = 0.01;
    p.zeta_h = 0.01;
    p.kappa = 0.6;
    p.alpha = 10.0;
    p.W = 1.0;
    return p;
}

// Routh-Hurwitz test on the closed-loop characteristic polynomial. The
// structure block contributes s^2 + 2 zeta_s lambda s + lambda^2 and the
// harvester block, multiplied through by (1 + K_e), gives the cubic
// (1+K_e) s^3 + c2 s^2 + c1 s + c0 with the coefficients below.
bool routh_hurwitz_stable(const HarvesterParams& p, const ControlGains& g) {
    const double e = 1.0 + g.K_e;
    const double m = 1.0 + g.K_m;
    const double k2 = p.kappa * p.kappa;
    const double a2 = (2.0 * p.zeta_h * e + p.alpha) / e;
    const double a1 = (m * e + 2.0 * p.zeta_h * p.alpha + k2) / e;
    const double a0 = m * p.alpha / e;
    const bool cubic = a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && a2 * a1 > a0;
    const bool quadratic = p.zeta_s * p.lambda > 0.0 && p.lambda > 0.0;
    return cubic && quadratic;
}

} // namespace

TEST_CASE("open loop matrix entries") {
    const StateSpaceModel m = build_open_loop(reference_params());
    CHECK(m.loop() == Loop::open);
    CHECK(m.A(1, 0) == -25.0);
    CHECK(m.A(1, 1) == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(m.A(4, 4) == -10.0);
    CHECK(m.A(3, 4) == doctest::Approx(-0.36).epsilon(1e-15));

    // integrator rows and fixed input/output vectors
    CHECK(m.A.row(0) == RowVector5(0, 1, 0, 0, 0));
    CHECK(m.A.row(2) == RowVector5(0, 0, 0, 1, 0));
    CHECK(m.B_xi == Vector5(0, 1, 0, -1, 0));
    CHECK(m.C == RowVector5(0, 0, 0, 0, 1));
}

TEST_CASE("zero coupling decouples the voltage") {
    HarvesterParams p = reference_params();
    p.kappa = 0.0;
    CHECK(build_open_loop(p).A(3, 4) == 0.0);
}

TEST_CASE("closed loop rows for K_m = 0.1, K_e = 900") {
    const StateSpaceModel m = build_closed_loop(reference_params(), {0.1, 900.0});
    CHECK(m.loop() == Loop::closed);
    REQUIRE(m.gains.has_value());
    CHECK(m.gains->K_m == 0.1);
    const double expected4[] = {25.0, 0.1, -1.1, -0.02, -0.36};
    const double expected5[] = {0.0, 0.0, 0.0, 1.0 / 901.0, -10.0 / 901.0};
    for (int j = 0; j < 5; ++j) {
        CHECK(m.A(3, j) == doctest::Approx(expected4[j]).epsilon(1e-15));
        CHECK(m.A(4, j) == doctest::Approx(expected5[j]).epsilon(1e-15));
    }
}

TEST_CASE("closed loop tends to the open loop as the gains vanish") {
    const HarvesterParams p = reference_params();
    const Matrix5 open = build_open_loop(p).A;
    double prev = INFINITY;
    for (const double eps : {1e-2, 1e-4, 1e-8, 1e-12}) {
        const double diff = (build_closed_loop(p, {eps, eps}).A - open).cwiseAbs().maxCoeff();
        CHECK(diff < prev);
        prev = diff;
    }
    CHECK(prev <= 1e-10);
}

TEST_CASE("feasibility verdicts") {
    CHECK(validate_gains({0.1, 900.0}));
    CHECK_FALSE(validate_gains({0.0, 0.0}));
    CHECK(validate_gains({0.5, -0.5}));
    CHECK_FALSE(validate_gains({0.5, -1.0}));
    CHECK_FALSE(validate_gains({-1e-300, 1.0}));
    CHECK_FALSE(validate_gains({NAN, 1.0}));
    CHECK_FALSE(validate_gains({1.0, NAN}));
}

TEST_CASE("infeasible gains are rejected with the violated constraint") {
    const HarvesterParams p = reference_params();
    CHECK_THROWS_AS(build_closed_loop(p, {0.3, -1.0}), InfeasibleGainsError);
    try {
        build_closed_loop(p, {0.3, -2.0});
        FAIL("expected rejection");
    } catch (const InfeasibleGainsError& e) {
        CHECK(std::string(e.what()).find("K_e > -1") != std::string::npos);
    }
    try {
        build_closed_loop(p, {0.0, 10.0});
        FAIL("expected rejection");
    } catch (const InfeasibleGainsError& e) {
        CHECK(std::string(e.what()).find("K_m > 0") != std::string::npos);
    }
}

TEST_CASE("parameter validation") {
    HarvesterParams p = reference_params();
    CHECK_NOTHROW(p.validate());
    p.zeta_h = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    CHECK_NOTHROW(p.validate_structure());
    p = reference_params();
    p.lambda = 0.0;
    CHECK_THROWS_AS(p.validate_structure(), DomainError);
    p = reference_params();
    p.kappa = -0.1;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = reference_params();
    p.W = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("hurwitz verdicts") {
    SUBCASE("damped open loop is stable") {
        const StabilityReport r = is_hurwitz(build_open_loop(reference_params()));
        CHECK(r.stable);
        CHECK(r.margin < 0.0);
    }
    SUBCASE("undamped uncoupled structure is marginal") {
        HarvesterParams p = reference_params();
        p.zeta_s = 0.0;
        p.zeta_h = 0.0;
        p.kappa = 0.0;
        const StabilityReport r = is_hurwitz(build_open_loop(p));
        CHECK_FALSE(r.stable);
        CHECK(std::abs(r.margin) < 1e-12);
    }
    SUBCASE("reference closed loop agrees with Routh-Hurwitz") {
        const HarvesterParams p = reference_params();
        const ControlGains g{0.1, 900.0};
        const StabilityReport r = is_hurwitz(build_closed_loop(p, g));
        CHECK(r.stable);
        CHECK(routh_hurwitz_stable(p, g));
        // slowest structure mode decays at zeta_s * lambda
        CHECK(r.margin >= -p.zeta_s * p.lambda - 1e-12);
    }
    SUBCASE("an explicitly unstable matrix") {
        Eigen::MatrixXd A(2, 2);
        A << 0.1, 1.0, -1.0, 0.1;
        const StabilityReport r = is_hurwitz(A);
        CHECK_FALSE(r.stable);
        CHECK(r.margin == doctest::Approx(0.1));
    }
}

TEST_CASE("random feasible draws are Hurwitz and agree with Routh-Hurwitz") {
    for (const std::uint64_t seed : {1u, 2u, 3u}) {
        GaussianRng rng(seed);
        for (int k = 0; k < 1000; ++k) {
            const RandomPlant d = draw_random_plant(rng);
            REQUIRE(validate_gains(d.gains));
            REQUIRE_NOTHROW(d.params.validate());
            const StabilityReport r = is_hurwitz(build_closed_loop(d.params, d.gains));
            INFO("seed=" << seed << " draw=" << k << " margin=" << r.margin);
            CHECK(r.stable);
            CHECK(routh_hurwitz_stable(d.params, d.gains));
        }
    }
}

TEST_CASE("nondimensionalize") {
    PhysicalParams phys;
    phys.m_s = 2.0;
    phys.k_s = 50.0;
    phys.m_h = 1.0;
    phys.k_h = 1.0;
    phys.c_s = 0.2;
    phys.c_h = 0.0;
    phys.theta = 0.6;
    phys.C_p = 1.0;
    phys.R = 0.1;

    SUBCASE("zero damping gives zero ratio") {
        CHECK(nondimensionalize(phys, 1.0).zeta_h == 0.0);
    }
    SUBCASE("critical damping identity") {
        phys.c_h = 2.0;
        CHECK(nondimensionalize(phys, 1.0).zeta_h == 1.0);
    }
    SUBCASE("coupling inversion") {
        CHECK(nondimensionalize(phys, 1.0).kappa == 0.6);
        phys.C_p = 2.5;
        phys.k_h = 4.0;
        phys.theta = 0.6 * std::sqrt(2.5 * 4.0);
        CHECK(nondimensionalize(phys, 1.0).kappa == doctest::Approx(0.6).epsilon(1e-15));
    }
    SUBCASE("remaining ratios") {
        const HarvesterParams p = nondimensionalize(phys, 3.0);
        CHECK(p.lambda == doctest::Approx(5.0).epsilon(1e-15));
        CHECK(p.zeta_s == doctest::Approx(0.2 / (2.0 * std::sqrt(100.0))).epsilon(1e-15));
        CHECK(p.alpha == doctest::Approx(10.0).epsilon(1e-15));
        CHECK(p.W == 3.0);
    }
    SUBCASE("common scaling of the harvester leaves ratios unchanged") {
        phys.c_h = 0.03;
        const HarvesterParams base = nondimensionalize(phys, 1.0);
        for (const double c : {1e-3, 0.5, 7.0, 1e4}) {
            PhysicalParams s = phys;
            s.m_h *= c;
            s.k_h *= c;
            s.c_h *= c;
            const HarvesterParams q = nondimensionalize(s, 1.0);
            CHECK(std::abs(q.zeta_h - base.zeta_h) <= 1e-12 * base.zeta_h);
            CHECK(std::abs(q.lambda - base.lambda) <= 1e-12 * base.lambda);
        }
    }
    SUBCASE("nonpositive physical quantities are rejected") {
        phys.C_p = 0.0;
        CHECK_THROWS_AS(nondimensionalize(phys, 1.0), DomainError);
        phys.C_p = 1.0;
        phys.m_h = -1.0;
        CHECK_THROWS_AS(nondimensionalize(phys, 1.0), DomainError);
        phys.m_h = 1.0;
        phys.theta = -0.1;
        CHECK_THROWS_AS(nondimensionalize(phys, 1.0), DomainError);
    }
}

TEST_CASE("dimensional power") {
    PhysicalParams unit;
    unit.theta = 1.0;
    // m_h = k_h = C_p = l_c = 1 and R = 1 give omega_h = alpha = kappa = 1
    CHECK(dimensional_power(0.0, unit) == 0.0);
    CHECK(dimensional_power(2.5, unit) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK_THROWS_AS(dimensional_power(-1e-3, unit), DomainError);

    PhysicalParams phys;
    phys.m_h = 0.01;
    phys.k_h = 0.01 * 100.0 * 100.0;  // omega_h = 100
    phys.C_p = 1.0;
    phys.R = 1.0 / (10.0 * 100.0);    // alpha = 10
    phys.theta = 0.6 * std::sqrt(100.0);  // kappa^2 = 0.36
    phys.l_c = 0.01;
    CHECK(dimensional_power(1.0, phys) == doctest::Approx(3.6).epsilon(1e-12));
}
