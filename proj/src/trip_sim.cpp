#include "riskgate/trip_sim.hpp"

#include <cmath>
#include <string>

#include "riskgate/rng.hpp"

namespace riskgate {

namespace {

constexpr std::array<ReservoirId, 2> kReservoirs{ReservoirId::A, ReservoirId::B};
constexpr std::array<Gate, 2> kGates{Gate::ab, Gate::ba};

std::size_t at(ReservoirId r) { return static_cast<std::size_t>(index(r)); }
std::size_t at(Gate g) { return static_cast<std::size_t>(index(g)); }

Route pick_route(const std::vector<RouteSplit>& split, std::mt19937_64& rng) {
    if (split.size() == 1) return split.front().route;
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double acc = 0.0;
    for (const auto& s : split) {
        acc += s.share;
        if (u < acc) return s.route;
    }
    return split.back().route;
}

}  // namespace

bool SystemState::conserved() const {
    return counters.entered == occupancy(ReservoirId::A) + occupancy(ReservoirId::B) + queued() + counters.completed;
}

double SystemState::remaining_distance(const Trip& trip) const {
    if (trip.status != TripStatus::traveling) return trip.lengths[trip.leg];
    return trip.leg_target - reservoirs[at(trip.location())].odometer;
}

double exit_flow_exponential(double occupancy, double trip_scale, double speed) {
    if (!(trip_scale > 0.0)) throw DomainError("exit_flow_exponential: trip scale must be > 0");
    if (occupancy < 0.0 || speed < 0.0) throw DomainError("exit_flow_exponential: negative input");
    return occupancy * speed / trip_scale;
}

TripSimulator::TripSimulator(const Scenario& scenario, std::uint64_t seed)
    : scenario_(&scenario),
      demand_rng_(make_stream(seed, Stream::demand)),
      accident_rng_{make_stream(seed, Stream::accidents_a), make_stream(seed, Stream::accidents_b)} {
    for (ReservoirId r : kReservoirs) {
        state_.hawkes[at(r)] = HawkesState(scenario.reservoir(r).gamma);
    }
    state_.gate.u_bar = scenario.gates.u_bar;
}

double TripSimulator::speed(ReservoirId r) const {
    const auto& p = scenario_->reservoir(r);
    const double rho = p.density(static_cast<double>(state_.occupancy(r)));
    if (rho > p.fd.rho_j) return 0.0;
    return effective_speed(rho, p.fd, state_.degradation[at(r)].chi);
}

double TripSimulator::intensity(ReservoirId r) const {
    return riskgate::intensity(static_cast<double>(state_.occupancy(r)), state_.hawkes[at(r)].load(),
                               speed(ReservoirId::A), speed(ReservoirId::B), scenario_->reservoir(r));
}

std::vector<Trip> TripSimulator::generate_arrivals(double t, double dt) {
    const auto& demand = scenario_->demand;
    std::vector<Trip> out;
    const double total = demand.profile.integral(t, t + dt);
    if (total <= 0.0) return out;

    std::pair<double, double> deltas{0.0, 0.0};
    if (demand.detour_enabled) {
        deltas = detour_fractions(speed(ReservoirId::A), speed(ReservoirId::B), demand.detour_elasticity);
    }
    const std::array<double, 2> expected{demand.share_a * total, (1.0 - demand.share_a) * total};
    for (ReservoirId origin : kReservoirs) {
        double& carry = state_.arrival_carry[at(origin)];
        carry += expected[at(origin)];
        const auto n = static_cast<long long>(std::floor(carry + 1e-9));
        carry -= static_cast<double>(n);
        if (carry < 0.0) carry = 0.0;
        if (n == 0) continue;
        const auto split = route_split(origin, demand, origin == ReservoirId::A ? deltas.first : deltas.second);
        for (long long i = 0; i < n; ++i) {
            Trip trip;
            trip.id = static_cast<std::uint32_t>(state_.trips.size() + out.size());
            trip.origin = origin;
            trip.route = pick_route(split, demand_rng_);
            const auto legs = route_legs(trip.route);
            trip.n_legs = static_cast<std::uint8_t>(legs.size());
            for (std::size_t k = 0; k < legs.size(); ++k) {
                trip.lengths[k] = demand.length(legs[k].length_class).sample(demand_rng_);
            }
            trip.entry_time = t;
            out.push_back(trip);
        }
    }
    return out;
}

void TripSimulator::enter_reservoir(Trip& trip) {
    auto& res = state_.reservoirs[at(trip.location())];
    trip.status = TripStatus::traveling;
    trip.leg_target = res.odometer + trip.lengths[trip.leg];
    res.exits.emplace(trip.leg_target, trip.id);
}

void TripSimulator::insert_trip(Trip trip) {
    trip.id = static_cast<std::uint32_t>(state_.trips.size());
    state_.trips.push_back(trip);
    enter_reservoir(state_.trips.back());
    ++state_.counters.entered;
}

StepRecord TripSimulator::advance(Controls controls, double dt) {
    if (!(dt > 0.0)) throw DomainError("advance: dt must be > 0");
    for (Gate g : kGates) {
        const double u = controls[g];
        if (u < 0.0 || u > state_.gate.u_bar[at(g)] * (1.0 + 1e-12)) {
            throw DomainError("advance: gate " + std::string(to_string(g)) + " flow outside [0, u_bar]");
        }
        state_.gate.u[at(g)] = u;
    }

    StepRecord rec;
    const double t = state_.t;

    // Boundary arrivals enter at the start of the step.
    auto arrivals = generate_arrivals(t, dt);
    rec.arrivals = static_cast<long long>(arrivals.size());
    for (auto& trip : arrivals) {
        state_.trips.push_back(trip);
        enter_reservoir(state_.trips.back());
        ++state_.counters.entered;
    }

    std::array<double, 2> v{};
    for (ReservoirId r : kReservoirs) {
        const auto& p = scenario_->reservoir(r);
        const double rho = p.density(static_cast<double>(state_.occupancy(r)));
        if (rho > p.fd.rho_j) {
            throw GridlockError("gridlock in reservoir " + std::string(to_string(r)) + " at t=" +
                                std::to_string(t * 60.0) + " min (density " + std::to_string(rho) + " > " +
                                std::to_string(p.fd.rho_j) + ")");
        }
        state_.degradation[at(r)] = degradation(state_.hawkes[at(r)].load(), p.kappa);
        v[at(r)] = effective_speed(rho, p.fd, state_.degradation[at(r)].chi);
    }
    std::array<double, 2> lambda{};
    for (ReservoirId r : kReservoirs) {
        lambda[at(r)] = riskgate::intensity(static_cast<double>(state_.occupancy(r)), state_.hawkes[at(r)].load(),
                                            v[0], v[1], scenario_->reservoir(r));
        state_.hawkes[at(r)].set_lambda(lambda[at(r)]);
    }
    state_.moments = moment_step(state_.moments, lambda[0], lambda[1], dt);

    // Vehicles advance at the common speed; legs ending inside the step are interpolated in time.
    for (ReservoirId r : kReservoirs) {
        auto& res = state_.reservoirs[at(r)];
        const double x0 = res.odometer;
        const double dx = v[at(r)] * dt;
        res.odometer += dx;
        while (!res.exits.empty() && res.exits.top().first <= res.odometer) {
            const auto [target, id] = res.exits.top();
            res.exits.pop();
            Trip& trip = state_.trips[id];
            const double t_done = t + dt * (dx > 0.0 ? (target - x0) / dx : 1.0);
            if (trip.last_leg()) {
                trip.status = TripStatus::completed;
                trip.completion_time = t_done;
                ++state_.counters.completed;
                ++rec.completions;
            } else {
                trip.status = TripStatus::queued;
                trip.queued_since = t_done;
                state_.gate.queue[at(gate_from(r))].push_back(id);
            }
        }
    }

    // Gates release FIFO up to the metered allowance; unused allowance is not banked.
    for (Gate g : kGates) {
        auto& queue = state_.gate.queue[at(g)];
        const double allowance = controls[g] * dt + state_.gate.carry[at(g)];
        const auto cap = static_cast<long long>(std::floor(allowance + 1e-9));
        const long long k = std::min<long long>(cap, static_cast<long long>(queue.size()));
        state_.gate.carry[at(g)] = k == cap ? std::max(0.0, allowance - static_cast<double>(cap)) : 0.0;
        for (long long i = 0; i < k; ++i) {
            Trip& trip = state_.trips[queue.front()];
            queue.pop_front();
            ++trip.leg;
            trip.crossing_time = t + dt;
            enter_reservoir(trip);
        }
        state_.counters.transferred[at(g)] += k;
        (g == Gate::ab ? rec.transfer_ab : rec.transfer_ba) = k;
    }

    // Accidents: one Bernoulli draw per reservoir per step, stamped at the step midpoint.
    for (ReservoirId r : kReservoirs) {
        auto& hk = state_.hawkes[at(r)];
        const int k = sample_accidents(lambda[at(r)], dt, accident_rng_[at(r)]);
        hk.advance(dt);
        if (k > 0) {
            hk.record_event(t + 0.5 * dt);
            const double chi = degradation_factor(hk.load(), scenario_->reservoir(r).kappa);
            accidents_.push_back({t + 0.5 * dt, r, lambda[at(r)], chi});
            rec.accidents += k;
        }
        state_.degradation[at(r)] = degradation(hk.load(), scenario_->reservoir(r).kappa);
    }

    state_.t = t + dt;
    rec.t = state_.t;
    rec.n_a = state_.occupancy(ReservoirId::A);
    rec.n_b = state_.occupancy(ReservoirId::B);
    rec.v_a = v[0];
    rec.v_b = v[1];
    rec.queue_ab = state_.queued(Gate::ab);
    rec.queue_ba = state_.queued(Gate::ba);
    rec.lambda_a = lambda[0];
    rec.lambda_b = lambda[1];
    return rec;
}

void TripSimulator::inject_accident(ReservoirId r) {
    auto& hk = state_.hawkes[at(r)];
    hk.record_event(state_.t);
    const double chi = degradation_factor(hk.load(), scenario_->reservoir(r).kappa);
    state_.degradation[at(r)] = {hk.load(), chi};
    accidents_.push_back({state_.t, r, hk.lambda(), chi});
}

}  // namespace riskgate
