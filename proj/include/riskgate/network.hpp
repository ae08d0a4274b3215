#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace riskgate {

/// Raised when a function is evaluated outside its physical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class ReservoirId { A = 0, B = 1 };

constexpr int index(ReservoirId r) { return static_cast<int>(r); }
constexpr ReservoirId other(ReservoirId r) { return r == ReservoirId::A ? ReservoirId::B : ReservoirId::A; }
std::string_view to_string(ReservoirId r);

enum class FdShape {
    triangular,
    trapezoidal,
    parabolic,  // Greenshields; smooth and strictly concave, used for steady-state studies
};

std::string_view to_string(FdShape s);
FdShape parse_fd_shape(std::string_view s);

/**
 * Speed-density relation of one reservoir, expressed per lane-km.
 *
 * Triangular: V = v_f below rho_c, w (rho_j - rho) / rho above.
 * Trapezoidal: adds a capacity plateau Q = q_max on [rho_1, rho_2].
 * Parabolic: V = v_f (1 - rho / rho_j).
 *
 * Use the named constructors; they derive the dependent breakpoints so the
 * continuity identities hold exactly.
 */
struct FundamentalDiagram {
    FdShape shape = FdShape::triangular;
    double v_f = 0.0;    // km/h
    double w = 0.0;      // km/h
    double rho_c = 0.0;  // veh/km/lane (rho_1 for trapezoidal)
    double rho_2 = 0.0;  // veh/km/lane, trapezoidal only
    double rho_j = 0.0;  // veh/km/lane
    double q_max = 0.0;  // veh/h/lane

    /// rho_c = q_max / v_f and w = q_max / (rho_j - rho_c).
    static FundamentalDiagram triangular(double v_f, double rho_j, double q_max);
    /// rho_1 = q_max / v_f and rho_2 = rho_j - q_max / w.
    static FundamentalDiagram trapezoidal(double v_f, double w, double rho_j, double q_max);
    static FundamentalDiagram parabolic(double v_f, double rho_j);

    /// Throws DomainError if the breakpoints are inconsistent.
    void validate() const;

    double speed(double rho) const;
    double flow(double rho) const { return rho * speed(rho); }

    /// One-sided derivatives of flow(rho).
    double flow_slope_left(double rho) const;
    double flow_slope_right(double rho) const;

    /// Smallest density at which flow reaches q_max.
    double critical_density() const { return rho_c; }
};

/// Static calibration of one reservoir.
struct ReservoirParams {
    ReservoirId id = ReservoirId::A;
    double lane_length = 1.0;  // lane-km
    FundamentalDiagram fd;
    double alpha = 0.0;  // exposure coefficient, 1/h per vehicle
    double beta = 0.0;   // self-excitation gain
    double gamma = 1.0;  // excitation decay, 1/h
    double eta = 0.0;    // speed-dispersion coefficient
    double kappa = 0.0;  // accident impact coefficient
    double mean_trip_length = 1.0;  // exponential trip-length scale for steady-state analytics, km

    void validate() const;

    double density(double n) const { return n / lane_length; }
    double jam_occupancy() const { return fd.rho_j * lane_length; }
};

/// Capacity reduction caused by a live-accident load.
struct DegradationState {
    double load = 0.0;
    double chi = 1.0;
};

double speed(double rho, const FundamentalDiagram& fd);
double flow(double rho, const FundamentalDiagram& fd);

/// chi = 1 / (1 + kappa a).
double degradation_factor(double load, double kappa);
DegradationState degradation(double load, double kappa);

double effective_speed(double rho, const FundamentalDiagram& fd, double chi);

}  // namespace riskgate
