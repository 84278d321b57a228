#include <doctest.h>

#include "veh/config.hpp"
#include "veh/errors.hpp"

using namespace veh;
using nlohmann::json;

namespace {

std::string config_error(const json& doc) {
    try {
        load_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

} // namespace

TEST_CASE("defaults") {
    const RunConfig c = load_config(default_config_json());
    CHECK(c.params.lambda == 5.0);
    CHECK(c.params.kappa == 0.6);
    REQUIRE(c.gains.has_value());
    CHECK(*c.gains == ControlGains{0.1, 900.0});
    CHECK(c.sweep.km.size() == 200);
    CHECK(c.sweep.km.back() == 1.0);
    CHECK(c.sweep.ke.front() == 1.0);
    CHECK(c.sweep.ke.back() == 1e4);
    CHECK(c.validate.gain_pairs.size() == 9);
    CHECK(c.simulate.seed == 42);
    CHECK(c.simulate.h == 0.01);
    CHECK(c.optimize.init == ControlGains{0.3, 925.0});
    CHECK(c.sweep.evaluator.method == EvalMethod::lyapunov);
    CHECK(c.sweep.evaluator.transfer == TransferMode::statespace);
    CHECK(load_config(json::object()).params.alpha == 10.0);
}

TEST_CASE("overrides") {
    json doc = default_config_json();
    apply_override(doc, "params.lambda=4");
    apply_override(doc, "gains.K_e=-0.5");
    apply_override(doc, "sweep.method=spectral");
    apply_override(doc, "sweep.km={\"logspace\":[0.1,10,5]}");
    apply_override(doc, "simulate.seed=\"18446744073709551615\"");
    const RunConfig c = load_config(doc);
    CHECK(c.params.lambda == 4.0);
    CHECK(c.gains->K_e == -0.5);
    CHECK(c.sweep.evaluator.method == EvalMethod::spectral);
    CHECK(c.sweep.km.size() == 5);
    CHECK(c.sweep.km.back() == 10.0);
    CHECK(c.simulate.seed == 18446744073709551615ull);
    CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "=3"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "params..x=3"), ConfigError);
}

TEST_CASE("grid specifications") {
    json doc = default_config_json();
    doc["sweep"] = {{"km", {0.1, 0.3, 0.5}}, {"ke", {{"linspace", {900, 950, 3}}}}};
    RunConfig c = load_config(doc);
    CHECK(c.sweep.km == std::vector<double>{0.1, 0.3, 0.5});
    CHECK(c.sweep.ke == std::vector<double>{900.0, 925.0, 950.0});
    doc["sweep"] = {{"km", {{"values", {2.0}}}}};
    CHECK(load_config(doc).sweep.km == std::vector<double>{2.0});
    doc["sweep"] = {{"km", {{"linspace", {0, 1, 3}}}}};
    CHECK(contains(config_error(doc), "sweep.km"));
    CHECK(contains(config_error(doc), "K_m > 0"));
    doc["sweep"] = {{"km", {{"linspace", {1, 2}}}}};
    CHECK(contains(config_error(doc), "sweep.km.linspace"));
    doc["sweep"] = {{"km", json::array()}};
    CHECK(contains(config_error(doc), "nonempty"));
}

TEST_CASE("rejections name the field") {
    json doc = default_config_json();
    doc["gains"]["K_e"] = -2.0;
    const std::string e = config_error(doc);
    CHECK(contains(e, "gains"));
    CHECK(contains(e, "K_e > -1"));

    doc = default_config_json();
    doc["params"]["lamda"] = 5.0;
    CHECK(contains(config_error(doc), "params.lamda: unknown key"));

    doc = default_config_json();
    doc["colour"] = "blue";
    CHECK(contains(config_error(doc), "colour: unknown key"));

    doc = default_config_json();
    doc["params"]["zeta_h"] = 0.0;
    CHECK(contains(config_error(doc), "params"));

    doc = default_config_json();
    doc["params"]["alpha"] = "ten";
    CHECK(contains(config_error(doc), "params.alpha: expected a number"));

    doc = default_config_json();
    doc["simulate"] = {{"burn_in", 0.95}};
    CHECK(contains(config_error(doc), "simulate.burn_in"));

    doc = default_config_json();
    doc["simulate"] = {{"seed", -3}};
    CHECK(contains(config_error(doc), "simulate.seed"));

    doc = default_config_json();
    doc["sweep"] = {{"method", "montecarlo"}};
    CHECK(contains(config_error(doc), "sweep.method"));

    doc = default_config_json();
    doc["quadrature"] = {{"rel_tol", 0.0}};
    CHECK(contains(config_error(doc), "quadrature"));

    doc = default_config_json();
    doc["physical"] = {{"m_h", 1.0}};
    CHECK(contains(config_error(doc), "either params or physical"));
}

TEST_CASE("physical parameters are nondimensionalized") {
    json doc = json::object();
    doc["physical"] = {{"m_s", 2.0}, {"k_s", 50.0}, {"c_s", 0.2}, {"m_h", 1.0}, {"k_h", 1.0}, {"c_h", 0.02},
                       {"theta", 0.6}, {"C_p", 1.0}, {"R", 0.1}, {"l_c", 0.01}, {"W", 1.0}};
    const RunConfig c = load_config(doc);
    CHECK(c.params.lambda == doctest::Approx(5.0));
    CHECK(c.params.kappa == doctest::Approx(0.6));
    CHECK(c.params.zeta_h == doctest::Approx(0.01));
    REQUIRE(c.physical.has_value());
    CHECK(c.physical->l_c == 0.01);
}

TEST_CASE("JSON text errors carry line and column") {
    try {
        parse_json_text("{\n  \"params\": {\n    \"lambda\": 5,,\n  }\n}", "cfg.json");
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        CHECK(contains(e.what(), "cfg.json:3:"));
    }
}

TEST_CASE("optimizer result round trip") {
    OptimResult r;
    r.gains_star = {24.004538411271234, -0.9637418082389726};
    r.J_star = 143.13842883733653;
    r.iterations = 94;
    r.converged = true;
    r.trace = {{{1.0, 2.0}, 0.5}, {{3.0, 4.0}, 0.25}};
    r.starts = {{{0.3, 925.0}, {24.0, -0.96}, 143.0, 90, true}};
    const json j = to_json(r, HarvesterParams{}, PowerEvaluator{});
    const OptimResult back = optim_result_from_json(json::parse(j.dump()));
    CHECK(back.gains_star == r.gains_star);
    CHECK(back.J_star == r.J_star);
    CHECK(back.iterations == r.iterations);
    CHECK(back.converged == r.converged);
    REQUIRE(back.trace.size() == 2);
    CHECK(back.trace[1].gains == ControlGains{3.0, 4.0});
    CHECK(back.trace[1].J == 0.25);
    REQUIRE(back.starts.size() == 1);
    CHECK(back.starts[0].gains_star == ControlGains{24.0, -0.96});
    CHECK(to_json(back, HarvesterParams{}, PowerEvaluator{}) == j);
}

TEST_CASE("power estimate round trip") {
    PowerEstimate e{3.4850730868853505e-07, 3.4810321818055327e-08, 10017, 89984, 32};
    const PowerEstimate back = power_estimate_from_json(json::parse(to_json(e).dump()));
    CHECK(back.mean == e.mean);
    CHECK(back.std_error == e.std_error);
    CHECK(back.burn_in_steps == e.burn_in_steps);
    CHECK(back.samples == e.samples);
    CHECK(back.batches == e.batches);
    CHECK_THROWS_AS(power_estimate_from_json(json{{"mean", 1.0}}), ConfigError);
}
