#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "riskgate/network.hpp"

namespace riskgate {

/// One piece of a piecewise-constant inflow profile; starts at `start` (h).
struct DemandSegment {
    double start = 0.0;  // h
    double rate = 0.0;   // veh/h
};

/// Total exogenous inflow over time, piecewise constant, zero before the first segment.
class DemandProfile {
public:
    DemandProfile() = default;
    explicit DemandProfile(std::vector<DemandSegment> segments);

    const std::vector<DemandSegment>& segments() const { return segments_; }

    double rate(double t) const;
    /// Integral of rate over [0, t].
    double cumulative(double t) const;
    double integral(double t0, double t1) const { return cumulative(t1) - cumulative(t0); }
    /// Time after which the rate stays at zero.
    double end_time() const;
    double total() const { return cumulative(end_time()); }
    double peak() const;

private:
    std::vector<DemandSegment> segments_;
};

/**
 * Lognormal trip-length class specified by its mean and standard deviation in km.
 * The log-space parameters are moment-matched.
 */
struct TripLengthDist {
    double mean = 1.0;  // km
    double std = 0.5;   // km

    double log_sigma() const;
    double log_mu() const;
    double sample(std::mt19937_64& rng) const;

    /// Conditional means of `k` equal-probability bins; their average equals `mean`.
    std::vector<double> bin_means(int k) const;
};

enum class LegClass : std::uint8_t { internal_a = 0, leg_b = 1, cross_a = 2 };

/**
 * Route anatomy. Each transition between consecutive legs passes through a gate.
 *
 *   a_internal  [A]          b_internal  [B]
 *   a_to_b      [A, B]       b_to_a      [B, A]
 *   a_detour    [A, B, A]    b_detour    [B, A, B]
 */
enum class Route : std::uint8_t { a_internal, b_internal, a_to_b, b_to_a, a_detour, b_detour };

struct RouteLeg {
    ReservoirId reservoir;
    LegClass length_class;
};

std::span<const RouteLeg> route_legs(Route r);
std::string_view to_string(Route r);

struct OdShares {
    double aa = 1.0;
    double ab = 0.0;
    double ba = 1.0;
    double bb = 0.0;
};

struct DemandModel {
    DemandProfile profile;
    double share_a = 0.15;
    OdShares od;
    double detour_elasticity = 0.0;
    bool detour_enabled = false;
    std::array<TripLengthDist, 3> lengths{};  // indexed by LegClass
    double forecast_error_bound = 0.0;        // veh/h
    std::array<double, 2> demand_ceiling{};   // veh/h per reservoir, 0 = derive from the profile

    const TripLengthDist& length(LegClass c) const { return lengths[static_cast<int>(c)]; }
    double rate_a(double t) const { return share_a * profile.rate(t); }
    double rate_b(double t) const { return (1.0 - share_a) * profile.rate(t); }
    double ceiling(ReservoirId r) const;

    void validate() const;
};

/// Logistic share of intra-reservoir demand that detours through the other reservoir.
std::pair<double, double> detour_fractions(double v_a, double v_b, double kappa_delta);

/// Inter-reservoir flow requests (d_AB, d_BA) in veh/h.
std::pair<double, double> effective_demands(double d_a, double d_b, const OdShares& od, std::pair<double, double> deltas);

/// Fractions of new trips per route for the given origin, with detours applied to intra-reservoir demand.
struct RouteSplit {
    Route route;
    double share;
};
std::vector<RouteSplit> route_split(ReservoirId origin, const DemandModel& demand, double delta);

}  // namespace riskgate
