#include "riskgate/demand.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace riskgate {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Inverse standard normal CDF (Acklam's rational approximation, refined by one Halley step).
double normal_quantile(double p) {
    if (p <= 0.0) return -INFINITY;
    if (p >= 1.0) return INFINITY;
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    double x;
    if (p < 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p > 1.0 - 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

constexpr RouteLeg kAInternal[] = {{ReservoirId::A, LegClass::internal_a}};
constexpr RouteLeg kBInternal[] = {{ReservoirId::B, LegClass::leg_b}};
constexpr RouteLeg kAToB[] = {{ReservoirId::A, LegClass::cross_a}, {ReservoirId::B, LegClass::leg_b}};
constexpr RouteLeg kBToA[] = {{ReservoirId::B, LegClass::leg_b}, {ReservoirId::A, LegClass::cross_a}};
constexpr RouteLeg kADetour[] = {
    {ReservoirId::A, LegClass::cross_a}, {ReservoirId::B, LegClass::leg_b}, {ReservoirId::A, LegClass::cross_a}};
constexpr RouteLeg kBDetour[] = {
    {ReservoirId::B, LegClass::leg_b}, {ReservoirId::A, LegClass::cross_a}, {ReservoirId::B, LegClass::leg_b}};

}  // namespace

DemandProfile::DemandProfile(std::vector<DemandSegment> segments) : segments_(std::move(segments)) {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i].rate < 0.0) throw DomainError("demand profile: negative rate");
        if (i > 0 && !(segments_[i].start > segments_[i - 1].start)) {
            throw DomainError("demand profile: segment start times must be strictly increasing");
        }
    }
}

double DemandProfile::rate(double t) const {
    double r = 0.0;
    for (const auto& s : segments_) {
        if (t >= s.start) r = s.rate;
        else break;
    }
    return r;
}

double DemandProfile::cumulative(double t) const {
    double total = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const double a = segments_[i].start;
        if (t <= a) break;
        const double b = i + 1 < segments_.size() ? std::min(t, segments_[i + 1].start) : t;
        total += segments_[i].rate * (b - a);
    }
    return total;
}

double DemandProfile::end_time() const {
    if (segments_.empty()) return 0.0;
    if (segments_.back().rate > 0.0) return INFINITY;
    for (std::size_t i = segments_.size(); i-- > 0;) {
        if (segments_[i].rate > 0.0) return segments_[i + 1].start;
    }
    return 0.0;
}

double DemandProfile::peak() const {
    double p = 0.0;
    for (const auto& s : segments_) p = std::max(p, s.rate);
    return p;
}

double TripLengthDist::log_sigma() const { return std::sqrt(std::log1p((std * std) / (mean * mean))); }

double TripLengthDist::log_mu() const {
    const double s = log_sigma();
    return std::log(mean) - 0.5 * s * s;
}

double TripLengthDist::sample(std::mt19937_64& rng) const {
    // Box-Muller on raw 53-bit uniforms keeps the stream identical across standard libraries.
    const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return std::exp(log_mu() + log_sigma() * z);
}

std::vector<double> TripLengthDist::bin_means(int k) const {
    // E[X; q_i < X < q_{i+1}] = mean * (Phi(z_{i+1} - s) - Phi(z_i - s)) for lognormal X.
    const double s = log_sigma();
    std::vector<double> out(static_cast<std::size_t>(k));
    double prev = 0.0;  // Phi(z_0 - s) with z_0 = -inf
    for (int i = 0; i < k; ++i) {
        const double p_hi = static_cast<double>(i + 1) / k;
        const double next = i + 1 == k ? 1.0 : normal_cdf(normal_quantile(p_hi) - s);
        out[static_cast<std::size_t>(i)] = mean * (next - prev) * k;
        prev = next;
    }
    return out;
}

std::span<const RouteLeg> route_legs(Route r) {
    switch (r) {
        case Route::a_internal: return kAInternal;
        case Route::b_internal: return kBInternal;
        case Route::a_to_b: return kAToB;
        case Route::b_to_a: return kBToA;
        case Route::a_detour: return kADetour;
        case Route::b_detour: return kBDetour;
    }
    return {};
}

std::string_view to_string(Route r) {
    switch (r) {
        case Route::a_internal: return "A";
        case Route::b_internal: return "B";
        case Route::a_to_b: return "A>B";
        case Route::b_to_a: return "B>A";
        case Route::a_detour: return "A>B>A";
        case Route::b_detour: return "B>A>B";
    }
    return "?";
}

double DemandModel::ceiling(ReservoirId r) const {
    const double c = demand_ceiling[static_cast<std::size_t>(index(r))];
    if (c > 0.0) return c;
    return (r == ReservoirId::A ? share_a : 1.0 - share_a) * profile.peak();
}

void DemandModel::validate() const {
    if (!(share_a >= 0.0 && share_a <= 1.0)) throw DomainError("demand.share_A must lie in [0, 1]");
    auto check_row = [](double x, double y, const char* row) {
        if (x < 0.0 || y < 0.0 || std::abs(x + y - 1.0) > 1e-9) {
            throw DomainError(std::string("demand.od_shares row ") + row + " must be non-negative and sum to 1");
        }
    };
    check_row(od.aa, od.ab, "A");
    check_row(od.ba, od.bb, "B");
    if (forecast_error_bound < 0.0) throw DomainError("demand.forecast_error_bound must be >= 0");
    if (detour_elasticity < 0.0) throw DomainError("demand.detour_elasticity must be >= 0");
    for (const auto& l : lengths) {
        if (!(l.mean > 0.0) || !(l.std > 0.0)) throw DomainError("demand.trip_lengths: mean and std must be > 0");
    }
    for (double c : demand_ceiling) {
        if (c < 0.0) throw DomainError("demand.demand_ceiling must be >= 0");
    }
    if (profile.peak() > ceiling(ReservoirId::A) + ceiling(ReservoirId::B) + 1e-9) {
        throw DomainError("demand profile exceeds the sum of the demand ceilings");
    }
}

std::pair<double, double> detour_fractions(double v_a, double v_b, double kappa_delta) {
    if (v_a < 0.0 || v_b < 0.0) throw DomainError("detour_fractions: negative speed");
    const double delta_a = 1.0 / (1.0 + std::exp(kappa_delta * (v_a - v_b)));
    const double delta_b = 1.0 / (1.0 + std::exp(kappa_delta * (v_b - v_a)));
    return {delta_a, delta_b};
}

std::pair<double, double> effective_demands(double d_a, double d_b, const OdShares& od,
                                            std::pair<double, double> deltas) {
    if (d_a < 0.0 || d_b < 0.0) throw DomainError("effective_demands: negative demand");
    return {(od.ab + deltas.first * od.aa) * d_a, (od.ba + deltas.second * od.bb) * d_b};
}

std::vector<RouteSplit> route_split(ReservoirId origin, const DemandModel& demand, double delta) {
    const double detour = demand.detour_enabled ? delta : 0.0;
    std::vector<RouteSplit> out;
    auto add = [&out](Route r, double s) {
        if (s > 0.0) out.push_back({r, s});
    };
    if (origin == ReservoirId::A) {
        add(Route::a_internal, demand.od.aa * (1.0 - detour));
        add(Route::a_detour, demand.od.aa * detour);
        add(Route::a_to_b, demand.od.ab);
    } else {
        add(Route::b_to_a, demand.od.ba);
        add(Route::b_internal, demand.od.bb * (1.0 - detour));
        add(Route::b_detour, demand.od.bb * detour);
    }
    return out;
}

}  // namespace riskgate
