#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <queue>
#include <vector>

#include "riskgate/accident.hpp"
#include "riskgate/demand.hpp"
#include "riskgate/scenario.hpp"
#include "riskgate/trip_sim.hpp"

namespace riskgate {

/// Coarse sample of a prediction trajectory.
struct PredictionSample {
    double t = 0.0;
    double n_a = 0.0;
    double n_b = 0.0;
    double queue_ba = 0.0;
    double queue_ab = 0.0;
    double transfer_ba = 0.0;  // veh/h over the sampling interval
    double lambda_a = 0.0;
    double lambda_b = 0.0;
};

/**
 * Deterministic expected-value counterpart of TripSimulator.
 *
 * Vehicles are carried as weighted cohorts; each trip-length class is split
 * into equal-probability bins represented by their conditional means.
 * Accident jumps are replaced by their intensity: the live load follows
 * da/dt = -gamma a + lambda and the count moments follow the moment ODEs.
 * Queued vehicles count toward delay but not toward any reservoir density.
 */
class PredictionModel {
public:
    PredictionModel(const Scenario& scenario, const DemandProfile& forecast);

    /// Snapshot of a measured simulator state; moments start from zero.
    static PredictionModel from_measured(const Scenario& scenario, const DemandProfile& forecast,
                                         const SystemState& measured);

    /// Advances by dt hours under the given gate flows.
    void step(Controls controls, double dt);

    double t() const { return t_; }
    bool gridlocked() const { return gridlocked_; }
    double occupancy(ReservoirId r) const { return mass_[static_cast<std::size_t>(index(r))]; }
    double queued(Gate g) const { return queue_mass_[static_cast<std::size_t>(index(g))]; }
    double load(ReservoirId r) const { return load_[static_cast<std::size_t>(index(r))]; }
    double speed(ReservoirId r) const;
    const MomentState& moments() const { return moments_; }
    /// Integral of N_A + N_B + queued, vehicle-hours.
    double delay_integral() const { return delay_; }
    double completed() const { return completed_; }
    double entered() const { return entered_; }
    double transferred(Gate g) const { return transferred_[static_cast<std::size_t>(index(g))]; }
    /// entered - (N_A + N_B + queued + completed); zero up to rounding.
    double mass_defect() const;

private:
    struct Cohort {
        double target;
        double mass;
        Route route;
        std::uint8_t leg;
        bool operator>(const Cohort& o) const { return target > o.target; }
    };
    struct Waiting {
        double mass;
        Route route;
        std::uint8_t leg;  // leg that just finished
    };
    using Heap = std::priority_queue<Cohort, std::vector<Cohort>, std::greater<>>;

    void spawn(Route route, std::uint8_t leg, double mass);

    const Scenario* scenario_;
    const DemandProfile* forecast_;
    std::array<std::vector<double>, 3> bins_;  // by LegClass
    double t_ = 0.0;
    std::array<double, 2> odometer_{};
    std::array<Heap, 2> cohorts_;
    std::array<double, 2> mass_{};
    std::array<std::deque<Waiting>, 2> queue_;
    std::array<double, 2> queue_mass_{};
    std::array<double, 2> load_{};
    std::array<double, 2> transferred_{};
    MomentState moments_;
    double delay_ = 0.0;
    double completed_ = 0.0;
    double entered_ = 0.0;
    bool gridlocked_ = false;
};

}  // namespace riskgate
