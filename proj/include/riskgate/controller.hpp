#pragma once

#include <array>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "riskgate/prediction.hpp"
#include "riskgate/scenario.hpp"

namespace riskgate {

/**
 * Gate control trajectory.
 *
 * A threshold policy holds the controlled gate at one extreme on
 * [t_start, t_star) and at the other from t_star on; the other gate stays
 * at its maximum. closed_until starts closed, open_until starts open.
 */
struct GatePolicy {
    PolicyKind kind = PolicyKind::no_control;
    ThresholdMode mode = ThresholdMode::closed_until;
    Gate gate = Gate::ba;
    double t_start = 0.0;  // h
    double t_star = 0.0;   // h
    std::array<double, 2> u_min{};
    std::array<double, 2> u_max{};
    std::array<double, 2> fixed{};  // steady_state rates

    static GatePolicy no_control(const Scenario& sc);
    static GatePolicy threshold(const Scenario& sc, ThresholdMode mode, double t_star, double t_start = 0.0);
    static GatePolicy steady(const Scenario& sc, double u_ab, double u_ba);

    bool initially_open() const { return mode == ThresholdMode::open_until; }
    /// Whether the controlled gate is at its maximum at time t.
    bool open_at(double t) const;
    /// Time-averaged gate flows over [t0, t1).
    Controls average(double t0, double t1) const;
};

/// Outcome of one deterministic prediction.
struct RolloutResult {
    double objective = 0.0;       // J
    double delay_integral = 0.0;  // vehicle-minutes
    double m_end = 0.0;           // expected accidents over the window
    double var_end = 0.0;         // predicted variance of the accident count
    double c_t = 0.0;
    double c_s = 0.0;
    double theta = 0.0;
    bool gridlock = false;
    std::vector<PredictionSample> trajectory;

    /// c_T * delay + c_S * m + theta * var.
    double recomposed() const { return c_t * delay_integral + c_s * m_end + theta * var_end; }
};

struct ObjectiveWeights {
    double c_t = 1.0;
    double c_s = 0.0;
    double theta = 0.0;
};

ObjectiveWeights objective_weights(const Scenario& sc);

/**
 * Runs the prediction model from `start` until `t_end` under `policy`.
 * A gridlocked prediction has infinite objective.
 */
RolloutResult rollout_cost(const PredictionModel& start, const GatePolicy& policy, double t_end,
                           const ObjectiveWeights& weights, double dt, double sample_every = 0.0);

/// Gate flows applied over [t0, t1).
using ControlSchedule = std::function<Controls(double t0, double t1)>;

/// Same as above for an arbitrary control schedule.
RolloutResult rollout_cost(const PredictionModel& start, const ControlSchedule& schedule, double t_end,
                           const ObjectiveWeights& weights, double dt, double sample_every = 0.0);

struct ThresholdSearch {
    GatePolicy policy;
    RolloutResult best;
    int evaluations = 0;
    std::vector<std::pair<double, double>> trace;  // (t_star, J) of every evaluated candidate
};

struct SearchOptions {
    double coarse_step = 60.0 / 3600.0;  // h
    double resolution = 1.0 / 3600.0;    // h
    double rollout_dt = 10.0 / 3600.0;   // h
    bool keep_trace = false;
};

SearchOptions search_options(const Scenario& sc);

/**
 * Best switching instant for a single-switch policy on [start.t(), t_end].
 *
 * Coarse grid on absolute multiples of coarse_step, then golden-section
 * refinement around the best grid point down to `resolution`, snapped to the
 * absolute resolution grid. When an incumbent switching time is supplied it
 * is kept unless a strictly better candidate is found.
 */
ThresholdSearch optimize_threshold(const Scenario& sc, const PredictionModel& start, ThresholdMode mode,
                                   double t_end, const ObjectiveWeights& weights, const SearchOptions& opts,
                                   std::optional<double> incumbent = std::nullopt);

/**
 * Receding-horizon gate controller.
 *
 * Event-triggered: optimizes at start and at every accident. Periodic:
 * optimizes at start and every tau_c. Each re-optimization keeps the gate at
 * its current value until a new switching instant, then flips it. At most one
 * switch is made between consecutive accidents; once it is spent the gate is
 * held until the next accident.
 */
class MpcController {
public:
    MpcController(const Scenario& sc, TriggerKind trigger);

    /// Initial solve; `precomputed` may carry an identical earlier t = 0 solve.
    void start(const PredictionModel& measured, const ThresholdSearch* precomputed = nullptr);
    void on_accident(const PredictionModel& measured);
    void on_tick(const PredictionModel& measured);

    bool wants_tick(double t) const;
    Controls controls(double t0, double t1);

    const GatePolicy& policy() const { return policy_; }
    int invocations() const { return invocations_; }
    const std::vector<double>& switch_times() const { return switches_; }
    const std::vector<GatePolicy>& history() const { return history_; }

private:
    void reoptimize(const PredictionModel& measured);
    void adopt(const GatePolicy& p, double t_now);

    const Scenario* sc_;
    TriggerKind trigger_;
    GatePolicy policy_;
    bool gate_open_ = false;
    bool switch_available_ = true;
    int invocations_ = 0;
    double next_tick_ = 0.0;
    std::vector<double> switches_;
    std::vector<GatePolicy> history_;
};

// ---------------------------------------------------------------------------
// Steady-state analytics (exponential trip lengths, constant demand)

/// Outflow g(N) = N v(N/L) / B of a reservoir without accidents.
double steady_outflow(const ReservoirParams& p, double occupancy);
/// One-sided derivatives of steady_outflow.
double steady_outflow_slope_left(const ReservoirParams& p, double occupancy);
double steady_outflow_slope_right(const ReservoirParams& p, double occupancy);
/// Largest outflow and the smallest occupancy attaining it.
double steady_capacity(const ReservoirParams& p);

struct Occupancies {
    double n_a = 0.0;
    double n_b = 0.0;
    double multiplier = 0.0;  // shared Lagrange multiplier of the outflow constraint
};

/// Minimizes w_A N_A + w_B N_B subject to g_A(N_A) + g_B(N_B) = F, bisecting on the shared multiplier.
Occupancies weighted_occupancies(double total_inflow, const ReservoirParams& a, const ReservoirParams& b,
                                 double weight_a, double weight_b);

/// Marginal-equality solution minimizing N_A + N_B.
Occupancies steady_state_occupancies(double f_a, double f_b, const ReservoirParams& a, const ReservoirParams& b);

/// Variance surcharge theta * alpha (gamma + beta) / gamma^2 of one reservoir.
double risk_surcharge(const ReservoirParams& p, double theta);

Occupancies risk_adjusted_occupancies(double f_a, double f_b, const ReservoirParams& a, const ReservoirParams& b,
                                      double theta, double c_t = 1.0);

/// Net offset (F_A - F_B - g_A + g_B) / 2.
double gate_offset(const Occupancies& n, double f_a, double f_b, const ReservoirParams& a, const ReservoirParams& b);

/// ([du]_+, [-du]_+) clipped to the metering capacities.
std::pair<double, double> steady_state_gates(const Occupancies& n, double f_a, double f_b, const ReservoirParams& a,
                                             const ReservoirParams& b, double u_bar_ab, double u_bar_ba);

/**
 * First-order change of the gate offset for small theta around the
 * risk-neutral optimum of smooth outflow curves:
 *   d(du)/d(theta) = -g'^2 (s_A - s_B) / (c_T (g_A'' + g_B''))
 * with s_r the per-unit-theta surcharge and g' the common marginal outflow.
 */
double risk_offset_slope(const Occupancies& n0, const ReservoirParams& a, const ReservoirParams& b, double c_t = 1.0);

}  // namespace riskgate
