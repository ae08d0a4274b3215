#include "riskgate/accident.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

namespace riskgate {

double intensity(double occupancy, double load, double v_a, double v_b, const ReservoirParams& p) {
    return p.alpha * occupancy + p.beta * load + p.eta * std::abs(v_a - v_b);
}

double decay_load(double load, double gamma, double dt) {
    if (dt < 0.0) throw DomainError("decay_load: dt must be >= 0");
    return load * std::exp(-gamma * dt);
}

void HawkesState::advance(double dt) {
    load_ = decay_load(load_, gamma_, dt);
    clock_ += dt;
}

void HawkesState::record_event(double t_event) {
    if (t_event > clock_) throw DomainError("record_event: event lies in the future");
    load_ += std::exp(-gamma_ * (clock_ - t_event));
    events_.push_back(t_event);
}

double HawkesState::load_from_history(double t) const {
    double a = 0.0;
    for (double ti : events_) {
        if (ti < t) a += std::exp(-gamma_ * (t - ti));
    }
    return a;
}

MomentState moment_step(MomentState mom, double lambda_a, double lambda_b, double dt) {
    const double total = lambda_a + lambda_b;
    MomentState next;
    const double inc = total * dt;
    next.s = mom.s + (2.0 * mom.m + 1.0) * inc + inc * inc;
    next.m = mom.m + inc;
    return next;
}

double event_probability(double lambda, double dt) { return -std::expm1(-lambda * dt); }

int sample_accidents(double lambda, double dt, std::mt19937_64& rng) {
    // 53-bit uniform in [0, 1), independent of the standard library's distribution code.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (lambda * dt > kCoarseStepThreshold) {
        static thread_local bool warned = false;
        if (!warned) {
            std::fprintf(stderr, "warning: lambda*dt = %.3g exceeds %.2g; step too coarse for the point process\n",
                         lambda * dt, kCoarseStepThreshold);
            warned = true;
        }
    }
    if (lambda <= 0.0) return 0;
    return u < event_probability(lambda, dt) ? 1 : 0;
}

std::vector<double> kolmogorov_forward(const std::function<double(double)>& lambda_path, int n_max, double horizon,
                                       double dt) {
    if (n_max < 0) throw DomainError("kolmogorov_forward: n_max must be >= 0");
    if (!(dt > 0.0) || horizon < 0.0) throw DomainError("kolmogorov_forward: need dt > 0 and T >= 0");

    const std::size_t n = static_cast<std::size_t>(n_max) + 1;
    std::vector<double> p(n, 0.0), k1(n), k2(n), k3(n), k4(n), tmp(n);
    p[0] = 1.0;

    auto rhs = [n](double lam, const std::vector<double>& x, std::vector<double>& out) {
        out[0] = -lam * x[0];
        for (std::size_t i = 1; i < n; ++i) out[i] = lam * (x[i - 1] - x[i]);
    };

    const auto steps = static_cast<long>(std::ceil(horizon / dt - 1e-12));
    const double h = steps > 0 ? horizon / static_cast<double>(steps) : 0.0;
    double t = 0.0;
    for (long k = 0; k < steps; ++k) {
        const double l0 = lambda_path(t);
        const double lm = lambda_path(t + 0.5 * h);
        const double l1 = lambda_path(t + h);
        rhs(l0, p, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * h * k1[i];
        rhs(lm, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * h * k2[i];
        rhs(lm, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + h * k3[i];
        rhs(l1, tmp, k4);
        for (std::size_t i = 0; i < n; ++i) p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t += h;
    }

    const double mass = std::accumulate(p.begin(), p.end(), 0.0);
    const double tail = 1.0 - mass;
    if (tail > 1e-8) {
        throw DomainError("kolmogorov_forward: tail mass " + std::to_string(tail) + " beyond n_max=" +
                          std::to_string(n_max) + "; increase n_max");
    }
    return p;
}

}  // namespace riskgate
