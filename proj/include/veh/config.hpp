#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "veh/model.hpp"
#include "veh/optimize.hpp"
#include "veh/sim.hpp"
#include "veh/spectral.hpp"

namespace veh {

struct SweepConfig {
    std::vector<double> km;
    std::vector<double> ke;
    PowerEvaluator evaluator;
};

struct OptimizeConfig {
    ControlGains init{0.3, 925.0};
    OptimOptions options;
};

struct ValidateConfig {
    std::vector<ControlGains> gain_pairs;
    double cross_method_rel_tol = 1e-6;
    ControlGains mc_gains{0.3, 925.0};
    double mc_h = 0.01;
    std::size_t mc_steps = 2000000;
    std::size_t mc_seeds = 4;
    std::size_t stability_draws = 1000;
    std::uint64_t stability_seed = 7;
};

/// Everything a CLI invocation needs, already validated.
struct RunConfig {
    HarvesterParams params;
    std::optional<PhysicalParams> physical;
    std::optional<ControlGains> gains;
    QuadratureOptions quadrature;
    SweepConfig sweep;
    SimOptions simulate;
    bool write_trajectory = true;
    OptimizeConfig optimize;
    ValidateConfig validate;
    std::string output_dir = ".";
};

/// Default document: lambda = 5, zeta_s = zeta_h = 0.01, kappa = 0.6, alpha = 10, W = 1.
nlohmann::json default_config_json();

/// Applies `key.path=value`; value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Parses JSON text; errors carry line and column.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

/**
 * Builds a RunConfig from a document layered over the defaults. Unknown keys,
 * wrong types and invariant violations throw ConfigError naming the field.
 */
RunConfig load_config(const nlohmann::json& doc);

nlohmann::json to_json(const OptimResult& r, const HarvesterParams& p, const PowerEvaluator& e);
OptimResult optim_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PowerEstimate& e);
PowerEstimate power_estimate_from_json(const nlohmann::json& j);

EvalMethod parse_method(const std::string& s);
TransferMode parse_transfer_mode(const std::string& s);
Scheme parse_scheme(const std::string& s);

} // namespace veh
