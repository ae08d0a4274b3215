#pragma once

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "riskgate/network.hpp"

namespace riskgate {

/// lambda = alpha N + beta a + eta |v_A - v_B|.
double intensity(double occupancy, double load, double v_a, double v_b, const ReservoirParams& p);

/// a' = a exp(-gamma dt).
double decay_load(double load, double gamma, double dt);

/**
 * Self-exciting accident process of one reservoir.
 *
 * The live load is kept recursively: between events it decays with the
 * exponential kernel, and every event adds one unit at its timestamp. The
 * event list is retained for the event log and for history recomputation.
 */
class HawkesState {
public:
    HawkesState() = default;
    explicit HawkesState(double gamma) : gamma_(gamma) {}

    double load() const { return load_; }
    double lambda() const { return lambda_; }
    int count() const { return static_cast<int>(events_.size()); }
    double clock() const { return clock_; }
    const std::vector<double>& event_times() const { return events_; }

    void set_lambda(double lambda) { lambda_ = lambda; }

    /// Moves the clock forward by dt, decaying the load.
    void advance(double dt);

    /// Records an event at time t_event <= clock(); adds exp(-gamma (clock - t_event)).
    void record_event(double t_event);

    /// Sum over the stored events of exp(-gamma (t - t_i)) for t_i < t.
    double load_from_history(double t) const;

private:
    double gamma_ = 1.0;
    double clock_ = 0.0;
    double load_ = 0.0;
    double lambda_ = 0.0;
    std::vector<double> events_;
};

/// First two moments of the accident count accrued since the last reset.
struct MomentState {
    double m = 0.0;
    double s = 0.0;

    double variance() const { return s - m * m; }
};

/// Exact step of dm/dt = L, ds/dt = (2m + 1) L for L = lambda_A + lambda_B held constant over dt.
MomentState moment_step(MomentState mom, double lambda_a, double lambda_b, double dt);

/// Probability of at least one event within dt under constant intensity.
double event_probability(double lambda, double dt);

/// lambda dt above this triggers a coarse-step warning.
inline constexpr double kCoarseStepThreshold = 0.1;

/**
 * Draws the number of events (0 or 1) in a step of length dt.
 *
 * Consumes exactly one uniform variate per call regardless of lambda, so
 * paired runs under different policies see the same random stream.
 */
int sample_accidents(double lambda, double dt, std::mt19937_64& rng);

/**
 * Forward integration of the counting-process master equation up to time T.
 *
 * Returns p_0..p_{n_max}. Mass leaving state n_max is tracked as tail mass;
 * the call throws DomainError when that tail exceeds 1e-8.
 */
std::vector<double> kolmogorov_forward(const std::function<double(double)>& lambda_path, int n_max, double horizon,
                                       double dt);

}  // namespace riskgate
