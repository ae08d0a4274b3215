#include "riskgate/network.hpp"

#include <cmath>
#include <string>

namespace riskgate {

std::string_view to_string(ReservoirId r) { return r == ReservoirId::A ? "A" : "B"; }

std::string_view to_string(FdShape s) {
    switch (s) {
        case FdShape::triangular: return "triangular";
        case FdShape::trapezoidal: return "trapezoidal";
        case FdShape::parabolic: return "parabolic";
    }
    return "?";
}

FdShape parse_fd_shape(std::string_view s) {
    if (s == "triangular") return FdShape::triangular;
    if (s == "trapezoidal") return FdShape::trapezoidal;
    if (s == "parabolic") return FdShape::parabolic;
    throw DomainError("unknown fundamental diagram shape '" + std::string(s) + "'");
}

FundamentalDiagram FundamentalDiagram::triangular(double v_f, double rho_j, double q_max) {
    FundamentalDiagram fd;
    fd.shape = FdShape::triangular;
    fd.v_f = v_f;
    fd.rho_j = rho_j;
    fd.q_max = q_max;
    fd.rho_c = q_max / v_f;
    fd.rho_2 = fd.rho_c;
    fd.w = q_max / (rho_j - fd.rho_c);
    fd.validate();
    return fd;
}

FundamentalDiagram FundamentalDiagram::trapezoidal(double v_f, double w, double rho_j, double q_max) {
    FundamentalDiagram fd;
    fd.shape = FdShape::trapezoidal;
    fd.v_f = v_f;
    fd.w = w;
    fd.rho_j = rho_j;
    fd.q_max = q_max;
    fd.rho_c = q_max / v_f;
    fd.rho_2 = rho_j - q_max / w;
    fd.validate();
    return fd;
}

FundamentalDiagram FundamentalDiagram::parabolic(double v_f, double rho_j) {
    FundamentalDiagram fd;
    fd.shape = FdShape::parabolic;
    fd.v_f = v_f;
    fd.rho_j = rho_j;
    fd.rho_c = rho_j / 2.0;
    fd.rho_2 = fd.rho_c;
    fd.q_max = v_f * rho_j / 4.0;
    fd.w = v_f;  // |dQ/drho| at jam
    fd.validate();
    return fd;
}

void FundamentalDiagram::validate() const {
    auto fail = [](const std::string& what) { throw DomainError("fundamental diagram: " + what); };
    if (!(v_f > 0.0)) fail("v_f must be > 0");
    if (!(rho_j > 0.0)) fail("rho_j must be > 0");
    if (!(q_max > 0.0)) fail("q_max must be > 0");
    if (!(rho_c > 0.0 && rho_c < rho_j)) fail("require 0 < rho_c < rho_j (q_max too large for v_f, rho_j?)");
    if (!(w > 0.0)) fail("w must be > 0");
    const double tol = 1e-9 * q_max;
    switch (shape) {
        case FdShape::triangular:
            if (std::abs(v_f * rho_c - q_max) > tol) fail("q_max != v_f * rho_c");
            if (std::abs(w * (rho_j - rho_c) - q_max) > tol) fail("v_f * rho_c != w * (rho_j - rho_c)");
            break;
        case FdShape::trapezoidal:
            if (!(rho_c < rho_2 && rho_2 < rho_j)) fail("require rho_1 < rho_2 < rho_j");
            if (std::abs(v_f * rho_c - q_max) > tol) fail("q_max != v_f * rho_1");
            if (std::abs(w * (rho_j - rho_2) - q_max) > tol) fail("q_max != w * (rho_j - rho_2)");
            break;
        case FdShape::parabolic:
            if (std::abs(v_f * rho_j / 4.0 - q_max) > tol) fail("q_max != v_f * rho_j / 4");
            break;
    }
}

double FundamentalDiagram::speed(double rho) const {
    if (!(rho >= 0.0) || rho > rho_j) {
        throw DomainError("density " + std::to_string(rho) + " outside [0, " + std::to_string(rho_j) + "]");
    }
    switch (shape) {
        case FdShape::triangular:
            return rho <= rho_c ? v_f : w * (rho_j - rho) / rho;
        case FdShape::trapezoidal:
            if (rho <= rho_c) return v_f;
            if (rho < rho_2) return q_max / rho;
            return w * (rho_j - rho) / rho;
        case FdShape::parabolic:
            return v_f * (1.0 - rho / rho_j);
    }
    return 0.0;
}

double FundamentalDiagram::flow_slope_left(double rho) const {
    switch (shape) {
        case FdShape::triangular:
            return rho <= rho_c ? v_f : -w;
        case FdShape::trapezoidal:
            if (rho <= rho_c) return v_f;
            if (rho <= rho_2) return 0.0;
            return -w;
        case FdShape::parabolic:
            return v_f * (1.0 - 2.0 * rho / rho_j);
    }
    return 0.0;
}

double FundamentalDiagram::flow_slope_right(double rho) const {
    switch (shape) {
        case FdShape::triangular:
            return rho < rho_c ? v_f : -w;
        case FdShape::trapezoidal:
            if (rho < rho_c) return v_f;
            if (rho < rho_2) return 0.0;
            return -w;
        case FdShape::parabolic:
            return v_f * (1.0 - 2.0 * rho / rho_j);
    }
    return 0.0;
}

void ReservoirParams::validate() const {
    const std::string who = "reservoir " + std::string(to_string(id)) + ": ";
    if (!(lane_length > 0.0)) throw DomainError(who + "lane_length must be > 0");
    fd.validate();
    if (alpha < 0.0 || beta < 0.0 || gamma < 0.0 || eta < 0.0 || kappa < 0.0) {
        throw DomainError(who + "alpha, beta, gamma, eta, kappa must be >= 0");
    }
    if (!(gamma > beta)) throw DomainError(who + "stationarity requires gamma > beta");
    if (!(mean_trip_length > 0.0)) throw DomainError(who + "mean_trip_length must be > 0");
}

double speed(double rho, const FundamentalDiagram& fd) { return fd.speed(rho); }

double flow(double rho, const FundamentalDiagram& fd) { return fd.flow(rho); }

double degradation_factor(double load, double kappa) {
    if (!(load >= 0.0) || !(kappa >= 0.0)) throw DomainError("degradation_factor: negative input");
    return 1.0 / (1.0 + kappa * load);
}

DegradationState degradation(double load, double kappa) { return {load, degradation_factor(load, kappa)}; }

double effective_speed(double rho, const FundamentalDiagram& fd, double chi) {
    if (!(chi > 0.0 && chi <= 1.0)) throw DomainError("effective_speed: chi must lie in (0, 1]");
    return chi * fd.speed(rho);
}

}  // namespace riskgate
