#include "riskgate/scenario.hpp"

#include <cmath>
#include <string>

namespace riskgate {

std::string_view to_string(Gate g) { return g == Gate::ab ? "AB" : "BA"; }

Gate parse_gate(std::string_view s) {
    if (s == "AB") return Gate::ab;
    if (s == "BA") return Gate::ba;
    throw ConfigError("", "unknown gate '" + std::string(s) + "' (expected AB or BA)");
}

std::string_view to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::no_control: return "none";
        case PolicyKind::threshold: return "threshold";
        case PolicyKind::steady_state: return "steady";
    }
    return "?";
}

std::string_view to_string(ThresholdMode m) { return m == ThresholdMode::open_until ? "open_until" : "closed_until"; }

std::string_view to_string(TriggerKind k) { return k == TriggerKind::event ? "event" : "periodic"; }

PolicyKind parse_policy_kind(std::string_view s) {
    if (s == "none" || s == "no_control") return PolicyKind::no_control;
    if (s == "threshold") return PolicyKind::threshold;
    if (s == "steady" || s == "steady_state") return PolicyKind::steady_state;
    throw ConfigError("", "unknown policy '" + std::string(s) + "' (expected none, threshold or steady)");
}

ThresholdMode parse_threshold_mode(std::string_view s) {
    if (s == "open_until") return ThresholdMode::open_until;
    if (s == "closed_until") return ThresholdMode::closed_until;
    throw ConfigError("", "unknown threshold mode '" + std::string(s) + "'");
}

TriggerKind parse_trigger_kind(std::string_view s) {
    if (s == "event") return TriggerKind::event;
    if (s == "periodic") return TriggerKind::periodic;
    throw ConfigError("", "unknown trigger '" + std::string(s) + "'");
}

void Scenario::validate() const {
    for (ReservoirId r : {ReservoirId::A, ReservoirId::B}) {
        const auto& p = reservoir(r);
        const std::string path = "reservoirs." + std::string(to_string(r));
        if (p.id != r) throw ConfigError(path, "reservoir id mismatch");
        try {
            p.validate();
        } catch (const DomainError& e) {
            std::string field = path;
            const std::string msg = e.what();
            if (msg.find("gamma > beta") != std::string::npos) field += ".gamma";
            throw ConfigError(field, msg);
        }
    }
    try {
        demand.validate();
    } catch (const DomainError& e) {
        throw ConfigError("demand", e.what());
    }
    for (Gate g : {Gate::ab, Gate::ba}) {
        const auto i = static_cast<std::size_t>(index(g));
        const std::string path = "gates." + std::string(to_string(g));
        if (!(gates.u_bar[i] >= 0.0)) throw ConfigError(path + ".u_bar", "must be >= 0");
        if (!(gates.u_min[i] >= 0.0 && gates.u_min[i] <= gates.u_bar[i])) {
            throw ConfigError(path + ".u_min", "must lie in [0, u_bar]");
        }
    }
    if (weights.c_t < 0.0) throw ConfigError("weights.c_T", "must be >= 0");
    if (weights.c_s < 0.0) throw ConfigError("weights.c_S", "must be >= 0");
    if (weights.theta < 0.0) throw ConfigError("weights.theta", "must be >= 0");
    if (weights.lambda_tradeoff && *weights.lambda_tradeoff < 0.0) {
        throw ConfigError("weights.lambda_tradeoff", "must be >= 0");
    }
    if (!(sim.dt_s > 0.0)) throw ConfigError("sim.dt_s", "must be > 0");
    if (!(sim.horizon_min > 0.0)) throw ConfigError("sim.horizon_min", "must be > 0");
    if (sim.clearance_min < 0.0) throw ConfigError("sim.clearance_min", "must be >= 0");
    const double demand_end_min = demand.profile.end_time() * 60.0;
    if (!std::isfinite(demand_end_min)) throw ConfigError("demand.profile", "demand must drop to zero eventually");
    if (sim.horizon_min + 1e-9 < demand_end_min + sim.clearance_min) {
        throw ConfigError("sim.horizon_min", "horizon must cover demand duration plus clearance");
    }
    if (!(controller.tau_c_s > 0.0)) throw ConfigError("controller.tau_c_s", "must be > 0");
    if (!(controller.prediction_min > 0.0)) throw ConfigError("controller.H_p_min", "must be > 0");
    if (!(controller.rollout_dt_s > 0.0)) throw ConfigError("controller.rollout_dt_s", "must be > 0");
    if (controller.length_bins < 1) throw ConfigError("controller.length_bins", "must be >= 1");
    if (!(controller.coarse_grid_s > 0.0)) throw ConfigError("controller.coarse_grid_s", "must be > 0");
    if (!(controller.refine_tol_s > 0.0)) throw ConfigError("controller.refine_tol_s", "must be > 0");
    if (mc.n_runs < 1) throw ConfigError("mc.n_runs", "must be >= 1");
}

}  // namespace riskgate
