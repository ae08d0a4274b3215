#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskgate/controller.hpp"
#include "riskgate/scenario.hpp"
#include "riskgate/trip_sim.hpp"

namespace riskgate {

/// Monte-Carlo batch could not produce a usable aggregate.
class HarnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One-minute sample of a simulated run.
struct SeriesSample {
    double t = 0.0;  // h, end of the interval
    double n_a = 0.0;
    double n_b = 0.0;
    double v_a = 0.0;
    double v_b = 0.0;
    double queue_ab = 0.0;
    double queue_ba = 0.0;
    double flow_ab = 0.0;  // transfers over the interval, veh/h
    double flow_ba = 0.0;
    double u_ab = 0.0;  // commanded gate flow at the end of the interval
    double u_ba = 0.0;
    double lambda_a = 0.0;
    double lambda_b = 0.0;
};

struct RunResult {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
    double mean_travel_time = 0.0;       // min/veh
    double objective_per_vehicle = 0.0;  // min/veh
    long long accidents_total = 0;
    std::array<long long, 2> accidents_by_reservoir{};
    long long entered = 0;
    long long unfinished = 0;
    int optimizer_invocations = 0;
    std::vector<double> switch_times;  // h
    std::vector<double> flow_series;   // B -> A transfer flow per sample interval, veh/h
    std::vector<SeriesSample> series;  // filled when requested
    std::vector<AccidentRecord> accidents;
};

struct RunOptions {
    TriggerKind trigger = TriggerKind::event;
    double sample_interval_h = 1.0 / 60.0;
    bool keep_series = false;
    bool check_conservation = true;
    /// Reusable t = 0 solve; only valid when the initial state and forecast are seed independent.
    const ThresholdSearch* initial_solve = nullptr;
};

/// Demand profile the controller plans with: the true profile with each segment perturbed by at most eps_D.
DemandProfile forecast_profile(const Scenario& sc, std::uint64_t seed);

/// The policy a steady-state run applies: analytic gates at peak demand.
GatePolicy steady_policy(const Scenario& sc);

/// t = 0 threshold solve on the empty network.
ThresholdSearch initial_solve(const Scenario& sc, const DemandProfile& forecast);

RunResult run_simulation(const Scenario& sc, PolicyKind policy, std::uint64_t seed, const RunOptions& options = {});

/// Mean and standard error of one metric.
struct Stat {
    double mean = 0.0;
    double se = 0.0;
    double sd = 0.0;
};

Stat summarize(const std::vector<double>& xs);

struct Aggregate {
    int n_runs = 0;
    int n_failed = 0;
    Stat travel_time;
    Stat objective;
    Stat accidents;
    Stat accidents_a;
    Stat accidents_b;
    Stat unfinished;
    Stat invocations;
    std::vector<double> mean_flow_series;
};

/// (value - baseline) / baseline, in percent.
double pct_change(double value, double baseline);

Aggregate aggregate(const std::vector<RunResult>& runs);

struct McOptions {
    PolicyKind policy = PolicyKind::threshold;
    TriggerKind trigger = TriggerKind::event;
    int n_runs = 300;
    std::uint64_t base_seed = 1;
    int threads = 0;  // 0 = hardware concurrency
    double max_failed_fraction = 0.05;
};

struct McResult {
    std::vector<RunResult> runs;  // ordered by seed
    Aggregate aggregate;
};

/// Runs seeds base_seed .. base_seed + n_runs - 1. Throws HarnessError when too many runs fail.
McResult run_monte_carlo(const Scenario& sc, const McOptions& options);

/// Scenario copy with the cost weights of one sweep cell.
Scenario with_tradeoff(const Scenario& sc, double lambda_tradeoff);
Scenario with_theta(const Scenario& sc, double theta);

struct SweepCell {
    std::string rate;  // "base" or "high"
    double weight = 0.0;
    Aggregate controlled;
};

struct FrontierPoint {
    double theta = 0.0;
    double predicted_mean = 0.0;
    double predicted_std = 0.0;
    double t_star = 0.0;  // h, initial solve
    std::optional<Stat> mc_accidents;
};

struct SweepResult {
    std::vector<std::string> rates;
    std::vector<Aggregate> baselines;  // by rate
    std::vector<SweepCell> cells;
    std::vector<FrontierPoint> frontier;
};

struct SweepOptions {
    std::vector<double> weights{0.0, 1.0 / 3.0, 2.0 / 3.0};
    std::vector<double> thetas;
    int n_runs = 300;
    int frontier_runs = 0;  // Monte-Carlo runs per frontier point, 0 = predictions only
    std::uint64_t base_seed = 1;
    int threads = 0;
};

/// Weight x rate matrix plus the theta frontier on the first scenario.
SweepResult sweep(const std::vector<std::pair<std::string, Scenario>>& rates, const SweepOptions& options);

std::vector<FrontierPoint> theta_frontier(const Scenario& sc, const std::vector<double>& thetas, int mc_runs,
                                          std::uint64_t base_seed, int threads);

/// Deterministic closed loop with the prediction model as the plant (no accidents).
struct DeterministicLoop {
    std::vector<Controls> controls;  // per plant step
    std::vector<double> switch_times;
    int invocations = 0;
};

DeterministicLoop run_deterministic_loop(const Scenario& sc, TriggerKind trigger);

}  // namespace riskgate
