#include "riskgate/prediction.hpp"

#include <cmath>
#include <map>

namespace riskgate {

namespace {

constexpr std::array<ReservoirId, 2> kReservoirs{ReservoirId::A, ReservoirId::B};
constexpr std::array<Gate, 2> kGates{Gate::ab, Gate::ba};

std::size_t at(ReservoirId r) { return static_cast<std::size_t>(index(r)); }
std::size_t at(Gate g) { return static_cast<std::size_t>(index(g)); }

}  // namespace

PredictionModel::PredictionModel(const Scenario& scenario, const DemandProfile& forecast)
    : scenario_(&scenario), forecast_(&forecast) {
    for (int c = 0; c < 3; ++c) {
        bins_[static_cast<std::size_t>(c)] =
            scenario.demand.lengths[static_cast<std::size_t>(c)].bin_means(scenario.controller.length_bins);
    }
}

PredictionModel PredictionModel::from_measured(const Scenario& scenario, const DemandProfile& forecast,
                                               const SystemState& measured) {
    PredictionModel model(scenario, forecast);
    model.t_ = measured.t;
    for (const Trip& trip : measured.trips) {
        if (trip.status != TripStatus::traveling) continue;
        const auto r = at(trip.location());
        model.cohorts_[r].push({measured.remaining_distance(trip), 1.0, trip.route, trip.leg});
        model.mass_[r] += 1.0;
    }
    for (Gate g : kGates) {
        for (std::uint32_t id : measured.gate.queue[at(g)]) {
            const Trip& trip = measured.trips[id];
            model.queue_[at(g)].push_back({1.0, trip.route, trip.leg});
            model.queue_mass_[at(g)] += 1.0;
        }
    }
    for (ReservoirId r : kReservoirs) model.load_[at(r)] = measured.hawkes[at(r)].load();
    model.entered_ = model.mass_[0] + model.mass_[1] + model.queue_mass_[0] + model.queue_mass_[1];
    return model;
}

double PredictionModel::speed(ReservoirId r) const {
    const auto& p = scenario_->reservoir(r);
    const double rho = p.density(mass_[at(r)]);
    if (rho > p.fd.rho_j) return 0.0;
    return effective_speed(rho, p.fd, degradation_factor(load_[at(r)], p.kappa));
}

double PredictionModel::mass_defect() const {
    return entered_ - (mass_[0] + mass_[1] + queue_mass_[0] + queue_mass_[1] + completed_);
}

void PredictionModel::spawn(Route route, std::uint8_t leg, double mass) {
    const auto legs = route_legs(route);
    const auto r = at(legs[leg].reservoir);
    const auto& bins = bins_[static_cast<std::size_t>(legs[leg].length_class)];
    const double share = mass / static_cast<double>(bins.size());
    for (double len : bins) cohorts_[r].push({odometer_[r] + len, share, route, leg});
    mass_[r] += mass;
}

void PredictionModel::step(Controls controls, double dt) {
    if (gridlocked_) return;
    const auto& demand = scenario_->demand;

    std::pair<double, double> deltas{0.0, 0.0};
    if (demand.detour_enabled) {
        deltas = detour_fractions(speed(ReservoirId::A), speed(ReservoirId::B), demand.detour_elasticity);
    }
    const double total = forecast_->integral(t_, t_ + dt);
    if (total > 0.0) {
        const std::array<double, 2> by_origin{demand.share_a * total, (1.0 - demand.share_a) * total};
        for (ReservoirId origin : kReservoirs) {
            if (by_origin[at(origin)] <= 0.0) continue;
            const double delta = origin == ReservoirId::A ? deltas.first : deltas.second;
            for (const auto& split : route_split(origin, demand, delta)) {
                spawn(split.route, 0, by_origin[at(origin)] * split.share);
            }
        }
        entered_ += total;
    }

    std::array<double, 2> v{};
    for (ReservoirId r : kReservoirs) {
        const auto& p = scenario_->reservoir(r);
        const double rho = p.density(mass_[at(r)]);
        if (rho > p.fd.rho_j) {
            gridlocked_ = true;
            return;
        }
        v[at(r)] = effective_speed(rho, p.fd, degradation_factor(load_[at(r)], p.kappa));
    }
    std::array<double, 2> lambda{};
    for (ReservoirId r : kReservoirs) {
        lambda[at(r)] = intensity(mass_[at(r)], load_[at(r)], v[0], v[1], scenario_->reservoir(r));
    }

    delay_ += (mass_[0] + mass_[1] + queue_mass_[0] + queue_mass_[1]) * dt;
    moments_ = moment_step(moments_, lambda[0], lambda[1], dt);
    for (ReservoirId r : kReservoirs) {
        const double g = scenario_->reservoir(r).gamma;
        if (g > 0.0) {
            const double decay = std::exp(-g * dt);
            load_[at(r)] = load_[at(r)] * decay + lambda[at(r)] * (1.0 - decay) / g;
        } else {
            load_[at(r)] += lambda[at(r)] * dt;
        }
    }

    for (ReservoirId r : kReservoirs) {
        auto& heap = cohorts_[at(r)];
        odometer_[at(r)] += v[at(r)] * dt;
        while (!heap.empty() && heap.top().target <= odometer_[at(r)]) {
            const Cohort c = heap.top();
            heap.pop();
            mass_[at(r)] -= c.mass;
            if (c.leg + 1u == route_legs(c.route).size()) {
                completed_ += c.mass;
            } else {
                const auto g = at(gate_from(r));
                queue_[g].push_back({c.mass, c.route, c.leg});
                queue_mass_[g] += c.mass;
            }
        }
        if (heap.empty()) mass_[at(r)] = 0.0;
        if (mass_[at(r)] < 0.0) mass_[at(r)] = 0.0;
    }

    for (Gate g : kGates) {
        auto& queue = queue_[at(g)];
        double allowance = controls[g] * dt;
        // Released mass is pooled per (route, next leg) so each step spawns one set of bins per route.
        std::map<std::pair<Route, std::uint8_t>, double> released;
        while (allowance > 0.0 && !queue.empty()) {
            Waiting& front = queue.front();
            const double take = std::min(allowance, front.mass);
            released[{front.route, static_cast<std::uint8_t>(front.leg + 1)}] += take;
            allowance -= take;
            front.mass -= take;
            queue_mass_[at(g)] -= take;
            transferred_[at(g)] += take;
            if (front.mass <= 1e-12) queue.pop_front();
        }
        if (queue.empty()) queue_mass_[at(g)] = 0.0;
        for (const auto& [key, mass] : released) spawn(key.first, key.second, mass);
    }

    t_ += dt;
}

}  // namespace riskgate
