#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <vector>

#include "riskgate/accident.hpp"
#include "riskgate/demand.hpp"
#include "riskgate/network.hpp"
#include "riskgate/scenario.hpp"

namespace riskgate {

/// A reservoir density exceeded its jam density: the scenario cannot be served.
class GridlockError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TripStatus : std::uint8_t { traveling, queued, completed };

struct Trip {
    std::uint32_t id = 0;
    ReservoirId origin = ReservoirId::A;
    Route route = Route::a_internal;
    std::uint8_t leg = 0;
    std::uint8_t n_legs = 1;
    std::array<double, 3> lengths{};  // km per leg
    double entry_time = 0.0;          // h
    std::optional<double> crossing_time;
    std::optional<double> completion_time;
    std::optional<double> queued_since;
    TripStatus status = TripStatus::traveling;
    double leg_target = 0.0;  // odometer reading of the current reservoir at which the leg ends

    ReservoirId location() const { return route_legs(route)[leg].reservoir; }
    bool last_leg() const { return leg + 1 == n_legs; }
};

/// Gated flows requested for the next step, veh/h.
struct Controls {
    double u_ab = 0.0;
    double u_ba = 0.0;

    double operator[](Gate g) const { return g == Gate::ab ? u_ab : u_ba; }
};

struct GateState {
    std::array<double, 2> u{};
    std::array<double, 2> u_bar{};
    std::array<std::deque<std::uint32_t>, 2> queue;  // FIFO of trip ids, indexed by Gate
    std::array<double, 2> carry{};
};

/**
 * Trips inside one reservoir.
 *
 * All trips in a reservoir move at the common speed, so a trip's remaining
 * distance is leg_target - odometer; the heap orders trips by exit.
 */
struct ReservoirTrips {
    using Entry = std::pair<double, std::uint32_t>;
    double odometer = 0.0;  // km travelled by a vehicle present since t = 0
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> exits;

    std::size_t occupancy() const { return exits.size(); }
};

struct Counters {
    long long entered = 0;
    long long completed = 0;
    std::array<long long, 2> transferred{};  // by Gate
};

struct SystemState {
    double t = 0.0;  // h
    std::vector<Trip> trips;
    std::array<ReservoirTrips, 2> reservoirs;
    std::array<HawkesState, 2> hawkes;
    std::array<DegradationState, 2> degradation;
    MomentState moments;
    GateState gate;
    Counters counters;
    std::array<double, 2> arrival_carry{};  // fractional arrivals by origin

    long long occupancy(ReservoirId r) const {
        return static_cast<long long>(reservoirs[static_cast<std::size_t>(index(r))].occupancy());
    }
    long long queued(Gate g) const { return static_cast<long long>(gate.queue[static_cast<std::size_t>(index(g))].size()); }
    long long queued() const { return queued(Gate::ab) + queued(Gate::ba); }
    /// entered == N_A + N_B + queued + completed.
    bool conserved() const;
    double remaining_distance(const Trip& trip) const;
};

/// Per-step time series sample.
struct StepRecord {
    double t = 0.0;  // end of step, h
    long long n_a = 0;
    long long n_b = 0;
    double v_a = 0.0;
    double v_b = 0.0;
    long long transfer_ab = 0;
    long long transfer_ba = 0;
    long long queue_ab = 0;
    long long queue_ba = 0;
    long long completions = 0;
    long long arrivals = 0;
    double lambda_a = 0.0;
    double lambda_b = 0.0;
    int accidents = 0;
};

struct AccidentRecord {
    double t = 0.0;
    ReservoirId reservoir = ReservoirId::A;
    double lambda = 0.0;     // intensity during the step of the event
    double chi_after = 1.0;  // degradation factor right after the event
};

/// g = N v / B: trip completions of a reservoir fed with exponential trip lengths of scale B.
double exit_flow_exponential(double occupancy, double trip_scale, double speed);

/**
 * Lagrangian trip simulator for the two-reservoir system.
 *
 * Each step: boundary arrivals enter, speeds follow from density and the
 * degradation factor, vehicles advance, finished legs complete or queue at
 * the gate, gates release in FIFO order, and accidents are sampled.
 */
class TripSimulator {
public:
    /// The scenario must outlive the simulator.
    TripSimulator(const Scenario& scenario, std::uint64_t seed);

    const SystemState& state() const { return state_; }
    const Scenario& scenario() const { return *scenario_; }

    /// Current effective speed of a reservoir, km/h.
    double speed(ReservoirId r) const;
    double intensity(ReservoirId r) const;

    /// New boundary trips for [t, t + dt), without inserting them.
    std::vector<Trip> generate_arrivals(double t, double dt);

    /// Advances by dt hours. Throws GridlockError if a density exceeds jam density.
    StepRecord advance(Controls controls, double dt);

    /// Adds a synthetic accident at the current clock.
    void inject_accident(ReservoirId r);

    const std::vector<AccidentRecord>& accident_log() const { return accidents_; }

    /// Puts a trip directly into its current leg (test setup).
    void insert_trip(Trip trip);

private:
    void enter_reservoir(Trip& trip);

    const Scenario* scenario_;
    SystemState state_;
    std::mt19937_64 demand_rng_;
    std::array<std::mt19937_64, 2> accident_rng_;
    std::vector<AccidentRecord> accidents_;
};

}  // namespace riskgate
