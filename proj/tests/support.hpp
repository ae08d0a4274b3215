#pragma once

#include <string>

#include "riskgate/io.hpp"
#include "riskgate/scenario.hpp"

namespace test_support {

inline std::string scenario_path(const std::string& name) { return std::string(RISKGATE_SCENARIO_DIR) + "/" + name; }

inline riskgate::Scenario load(const std::string& name) { return riskgate::parse_scenario(scenario_path(name)); }

/// Copenhagen calibration with every accident coefficient set to zero.
inline riskgate::Scenario accident_free(riskgate::Scenario sc) {
    for (auto& r : sc.reservoirs) {
        r.alpha = 0.0;
        r.beta = 0.0;
        r.eta = 0.0;
    }
    return sc;
}

/// Single-reservoir style setup: everything starts and ends in A with the given exponential-like class.
inline riskgate::Scenario internal_only(riskgate::Scenario sc, double rate, double mean_km, double std_km) {
    sc.demand.share_a = 1.0;
    sc.demand.profile = riskgate::DemandProfile({{0.0, rate}});
    sc.demand.lengths[0] = {mean_km, std_km};
    sc.sim.clearance_min = 0.0;
    return sc;
}

}  // namespace test_support
