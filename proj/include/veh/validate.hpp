#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "veh/config.hpp"
#include "veh/model.hpp"
#include "veh/rng.hpp"

namespace veh {

struct CheckOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckOutcome> checks;

    bool all_passed() const noexcept;
    std::string table() const;
    nlohmann::json to_json() const;
};

struct RandomPlant {
    HarvesterParams params;
    ControlGains gains;
};

/**
 * Draw from the stability-test distribution: log-uniform lambda in [0.1, 10],
 * zeta_s and zeta_h in [1e-3, 1], alpha in [0.1, 100], K_m in [1e-6, 1e3] and
 * 1 + K_e in [1e-6, 1e4 + 1]; kappa uniform in [0, 2].
 */
RandomPlant draw_random_plant(GaussianRng& rng);

/// Cross-method consistency suite behind `vehopt validate`.
ValidationReport run_validation(const RunConfig& config);

} // namespace veh
