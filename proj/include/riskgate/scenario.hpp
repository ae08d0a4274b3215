#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "riskgate/demand.hpp"
#include "riskgate/network.hpp"

namespace riskgate {

/// Perimeter gates. AB meters A -> B transfers, BA meters B -> A transfers.
enum class Gate { ab = 0, ba = 1 };

constexpr int index(Gate g) { return static_cast<int>(g); }
std::string_view to_string(Gate g);
Gate parse_gate(std::string_view s);
/// Gate crossed when leaving `from`.
constexpr Gate gate_from(ReservoirId from) { return from == ReservoirId::A ? Gate::ab : Gate::ba; }

struct GateConfig {
    std::array<double, 2> u_bar{43000.0, 43000.0};  // metering capacity, veh/h, indexed by Gate
    std::array<double, 2> u_min{0.0, 0.0};          // closed level, veh/h
    Gate controlled = Gate::ba;
    double perimeter_length_km = 0.0;  // informational only
};

/**
 * Weights of the delay / safety / risk objective.
 *
 * Delay is measured in vehicle-minutes, so c_T = 1 prices one vehicle-minute.
 * When `lambda_tradeoff` (minutes of travel time per vehicle traded for one
 * accident) is set, c_S = lambda_tradeoff * total entered vehicles.
 */
struct CostWeights {
    double c_t = 1.0;
    double c_s = 0.0;
    double theta = 0.0;
    std::optional<double> lambda_tradeoff;

    double safety_weight(double total_vehicles) const {
        return lambda_tradeoff ? *lambda_tradeoff * total_vehicles : c_s;
    }
};

struct SimSettings {
    double dt_s = 1.0;
    double horizon_min = 75.0;
    double clearance_min = 15.0;

    double dt_h() const { return dt_s / 3600.0; }
    double horizon_h() const { return horizon_min / 60.0; }
};

enum class PolicyKind { no_control, threshold, steady_state };
enum class ThresholdMode { open_until, closed_until };
enum class TriggerKind { event, periodic };

std::string_view to_string(PolicyKind k);
std::string_view to_string(ThresholdMode m);
std::string_view to_string(TriggerKind k);
PolicyKind parse_policy_kind(std::string_view s);
ThresholdMode parse_threshold_mode(std::string_view s);
TriggerKind parse_trigger_kind(std::string_view s);

struct ControllerSettings {
    PolicyKind policy = PolicyKind::threshold;
    ThresholdMode mode = ThresholdMode::closed_until;
    TriggerKind trigger = TriggerKind::event;
    double tau_c_s = 60.0;          // periodic re-optimization interval
    double prediction_min = 90.0;   // H_p
    double rollout_dt_s = 10.0;     // step of the deterministic prediction model
    int length_bins = 16;           // equal-probability bins per trip-length class in the prediction model
    double coarse_grid_s = 60.0;    // threshold search: coarse grid spacing
    double refine_tol_s = 1.0;      // threshold search: final resolution
};

struct McSettings {
    int n_runs = 300;
    std::uint64_t base_seed = 1;
};

/// Full experiment configuration.
struct Scenario {
    std::string name = "scenario";
    std::array<ReservoirParams, 2> reservoirs{};
    DemandModel demand;
    GateConfig gates;
    CostWeights weights;
    SimSettings sim;
    ControllerSettings controller;
    McSettings mc;

    const ReservoirParams& reservoir(ReservoirId r) const { return reservoirs[static_cast<std::size_t>(index(r))]; }
    ReservoirParams& reservoir(ReservoirId r) { return reservoirs[static_cast<std::size_t>(index(r))]; }

    double total_vehicles() const { return demand.profile.total(); }
    double safety_weight() const { return weights.safety_weight(total_vehicles()); }

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Configuration problem; `field` is a dotted path into the scenario document.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace riskgate
