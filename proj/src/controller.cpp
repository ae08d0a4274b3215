#include "riskgate/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskgate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t at(Gate g) { return static_cast<std::size_t>(index(g)); }

bool strictly_better(double a, double b) {
    if (std::isinf(b) && !std::isinf(a)) return true;
    return a < b - 1e-12 * std::max(1.0, std::abs(b));
}

bool tied(double a, double b) { return !strictly_better(a, b) && !strictly_better(b, a); }

}  // namespace

// ---------------------------------------------------------------------------
// GatePolicy

GatePolicy GatePolicy::no_control(const Scenario& sc) {
    GatePolicy p;
    p.kind = PolicyKind::no_control;
    p.gate = sc.gates.controlled;
    p.u_min = sc.gates.u_min;
    p.u_max = sc.gates.u_bar;
    return p;
}

GatePolicy GatePolicy::threshold(const Scenario& sc, ThresholdMode mode, double t_star, double t_start) {
    GatePolicy p = no_control(sc);
    p.kind = PolicyKind::threshold;
    p.mode = mode;
    p.t_start = t_start;
    p.t_star = std::max(t_star, t_start);
    return p;
}

GatePolicy GatePolicy::steady(const Scenario& sc, double u_ab, double u_ba) {
    GatePolicy p = no_control(sc);
    p.kind = PolicyKind::steady_state;
    p.fixed = {std::clamp(u_ab, 0.0, sc.gates.u_bar[0]), std::clamp(u_ba, 0.0, sc.gates.u_bar[1])};
    return p;
}

bool GatePolicy::open_at(double t) const {
    if (kind != PolicyKind::threshold) return true;
    return initially_open() != (t >= t_star);
}

Controls GatePolicy::average(double t0, double t1) const {
    switch (kind) {
        case PolicyKind::no_control:
            return {u_max[0], u_max[1]};
        case PolicyKind::steady_state:
            return {fixed[0], fixed[1]};
        case PolicyKind::threshold:
            break;
    }
    const double span = t1 - t0;
    const double after = span > 0.0 ? std::clamp((t1 - std::max(t0, t_star)) / span, 0.0, 1.0) : (t0 >= t_star ? 1.0 : 0.0);
    const double open_fraction = initially_open() ? 1.0 - after : after;
    std::array<double, 2> u = u_max;
    const auto g = at(gate);
    u[g] = u_min[g] + open_fraction * (u_max[g] - u_min[g]);
    return {u[0], u[1]};
}

// ---------------------------------------------------------------------------
// Rollout and threshold search

ObjectiveWeights objective_weights(const Scenario& sc) {
    return {sc.weights.c_t, sc.safety_weight(), sc.weights.theta};
}

RolloutResult rollout_cost(const PredictionModel& start, const GatePolicy& policy, double t_end,
                           const ObjectiveWeights& weights, double dt, double sample_every) {
    return rollout_cost(
        start, [&policy](double t0, double t1) { return policy.average(t0, t1); }, t_end, weights, dt, sample_every);
}

RolloutResult rollout_cost(const PredictionModel& start, const ControlSchedule& schedule, double t_end,
                           const ObjectiveWeights& weights, double dt, double sample_every) {
    PredictionModel model = start;
    RolloutResult out;
    out.c_t = weights.c_t;
    out.c_s = weights.c_s;
    out.theta = weights.theta;

    double next_sample = model.t();
    double last_transfer = model.transferred(Gate::ba);
    double last_sample_t = model.t();
    auto sample = [&]() {
        PredictionSample s;
        s.t = model.t();
        s.n_a = model.occupancy(ReservoirId::A);
        s.n_b = model.occupancy(ReservoirId::B);
        s.queue_ab = model.queued(Gate::ab);
        s.queue_ba = model.queued(Gate::ba);
        const double span = model.t() - last_sample_t;
        s.transfer_ba = span > 0.0 ? (model.transferred(Gate::ba) - last_transfer) / span : 0.0;
        last_transfer = model.transferred(Gate::ba);
        last_sample_t = model.t();
        out.trajectory.push_back(s);
    };

    while (model.t() < t_end - 1e-12) {
        const double h = std::min(dt, t_end - model.t());
        const double t0 = model.t();
        model.step(schedule(t0, t0 + h), h);
        if (model.gridlocked()) {
            out.gridlock = true;
            out.objective = kInf;
            return out;
        }
        if (sample_every > 0.0 && model.t() >= next_sample + sample_every - 1e-12) {
            sample();
            next_sample += sample_every;
        }
    }
    out.delay_integral = model.delay_integral() * 60.0;
    out.m_end = model.moments().m;
    out.var_end = model.moments().variance();
    out.objective = out.recomposed();
    return out;
}

SearchOptions search_options(const Scenario& sc) {
    SearchOptions o;
    o.coarse_step = sc.controller.coarse_grid_s / 3600.0;
    o.resolution = sc.controller.refine_tol_s / 3600.0;
    o.rollout_dt = sc.controller.rollout_dt_s / 3600.0;
    return o;
}

ThresholdSearch optimize_threshold(const Scenario& sc, const PredictionModel& start, ThresholdMode mode,
                                   double t_end, const ObjectiveWeights& weights, const SearchOptions& opts,
                                   std::optional<double> incumbent) {
    const double t0 = start.t();
    t_end = std::max(t_end, t0);
    ThresholdSearch out;

    struct Candidate {
        double t_star;
        RolloutResult result;
    };
    auto evaluate = [&](double ts) {
        ts = std::clamp(ts, t0, t_end);
        Candidate c{ts, rollout_cost(start, GatePolicy::threshold(sc, mode, ts, t0), t_end, weights, opts.rollout_dt)};
        ++out.evaluations;
        if (opts.keep_trace) out.trace.emplace_back(ts, c.result.objective);
        return c;
    };

    // Coarse grid on absolute multiples of the grid step.
    std::vector<double> grid{t0};
    for (auto k = static_cast<long>(std::floor(t0 / opts.coarse_step)) + 1;; ++k) {
        const double ts = static_cast<double>(k) * opts.coarse_step;
        if (ts >= t_end - 1e-12) break;
        if (ts > t0 + 1e-12) grid.push_back(ts);
    }
    if (t_end > t0) grid.push_back(t_end);

    std::vector<Candidate> coarse;
    coarse.reserve(grid.size());
    std::size_t best = 0;
    for (double ts : grid) {
        coarse.push_back(evaluate(ts));
        if (strictly_better(coarse.back().result.objective, coarse[best].result.objective)) best = coarse.size() - 1;
    }
    // Ties resolve to "no switch inside the window".
    if (tied(coarse.back().result.objective, coarse[best].result.objective)) best = coarse.size() - 1;
    Candidate winner = coarse[best];

    // Golden-section refinement inside the neighbouring grid cells.
    const double lo0 = best > 0 ? coarse[best - 1].t_star : winner.t_star;
    const double hi0 = best + 1 < coarse.size() ? coarse[best + 1].t_star : winner.t_star;
    if (hi0 - lo0 > opts.resolution) {
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = lo0, hi = hi0;
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        double f1 = evaluate(x1).result.objective, f2 = evaluate(x2).result.objective;
        while (hi - lo > opts.resolution) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = evaluate(x1).result.objective;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = evaluate(x2).result.objective;
            }
        }
        const double mid = 0.5 * (lo + hi);
        const double snapped_lo = std::floor(mid / opts.resolution + 1e-9) * opts.resolution;
        for (double ts : {snapped_lo, snapped_lo + opts.resolution}) {
            if (ts < lo0 - 1e-12 || ts > hi0 + 1e-12) continue;
            Candidate c = evaluate(ts);
            if (strictly_better(c.result.objective, winner.result.objective)) winner = std::move(c);
        }
    }

    if (incumbent && *incumbent >= t0 - 1e-12) {
        Candidate inc = evaluate(std::min(*incumbent, t_end));
        if (!strictly_better(winner.result.objective, inc.result.objective)) winner = std::move(inc);
    }

    out.policy = GatePolicy::threshold(sc, mode, winner.t_star, t0);
    if (winner.t_star >= t_end) out.policy.t_star = kInf;  // never switches inside the window
    out.best = std::move(winner.result);
    return out;
}

// ---------------------------------------------------------------------------
// MpcController

MpcController::MpcController(const Scenario& sc, TriggerKind trigger)
    : sc_(&sc), trigger_(trigger), policy_(GatePolicy::no_control(sc)) {
    gate_open_ = sc.controller.mode == ThresholdMode::open_until;
}

void MpcController::start(const PredictionModel& measured, const ThresholdSearch* precomputed) {
    next_tick_ = measured.t() + sc_->controller.tau_c_s / 3600.0;
    if (precomputed != nullptr) {
        ++invocations_;
        adopt(precomputed->policy, measured.t());
        return;
    }
    reoptimize(measured);
}

void MpcController::on_accident(const PredictionModel& measured) {
    // An accident opens a new smooth segment, which may contain one more switch.
    switch_available_ = true;
    if (trigger_ == TriggerKind::event) reoptimize(measured);
}

bool MpcController::wants_tick(double t) const {
    return trigger_ == TriggerKind::periodic && t >= next_tick_ - 1e-9;
}

void MpcController::on_tick(const PredictionModel& measured) {
    next_tick_ += sc_->controller.tau_c_s / 3600.0;
    reoptimize(measured);
}

void MpcController::reoptimize(const PredictionModel& measured) {
    const double t = measured.t();
    const double t_end = std::min(t + sc_->controller.prediction_min / 60.0, sc_->sim.horizon_h());
    const ThresholdMode family = gate_open_ ? ThresholdMode::open_until : ThresholdMode::closed_until;
    ++invocations_;
    if (!switch_available_) {
        // The switch of this segment is spent: hold the gate until the next accident.
        adopt(GatePolicy::threshold(*sc_, family, INFINITY, t), t);
        return;
    }
    std::optional<double> incumbent;
    if (policy_.kind == PolicyKind::threshold) {
        incumbent = policy_.t_star > t ? std::min(policy_.t_star, t_end) : t_end;
    }
    const auto search = optimize_threshold(*sc_, measured, family, t_end, objective_weights(*sc_), search_options(*sc_),
                                           incumbent);
    adopt(search.policy, t);
}

void MpcController::adopt(const GatePolicy& p, double t_now) {
    policy_ = p;
    history_.push_back(p);
    const bool open = p.open_at(t_now);
    if (history_.size() == 1) {
        // Flipping the configured initial state at t0 is not logged as a switch but still uses up the segment's one.
        if (open != gate_open_) switch_available_ = false;
        gate_open_ = open;
    } else if (open != gate_open_) {
        switches_.push_back(t_now);
        gate_open_ = open;
        switch_available_ = false;
    }
}

Controls MpcController::controls(double t0, double t1) {
    const Controls u = policy_.average(t0, t1);
    const bool open = policy_.open_at(t1);
    if (open != gate_open_) {
        switches_.push_back(std::clamp(policy_.t_star, t0, t1));
        gate_open_ = open;
        switch_available_ = false;
    }
    return u;
}

// ---------------------------------------------------------------------------
// Steady state

double steady_outflow(const ReservoirParams& p, double occupancy) {
    return p.lane_length * p.fd.flow(p.density(occupancy)) / p.mean_trip_length;
}

double steady_outflow_slope_left(const ReservoirParams& p, double occupancy) {
    return p.fd.flow_slope_left(p.density(occupancy)) / p.mean_trip_length;
}

double steady_outflow_slope_right(const ReservoirParams& p, double occupancy) {
    return p.fd.flow_slope_right(p.density(occupancy)) / p.mean_trip_length;
}

double steady_capacity(const ReservoirParams& p) { return p.lane_length * p.fd.q_max / p.mean_trip_length; }

namespace {

// Densities maximizing mu g(N) - w N: the set where the marginal outflow crosses w / mu.
struct DensityRange {
    double lo;
    double hi;
};

DensityRange argmax_density(const ReservoirParams& p, double marginal) {
    const auto& fd = p.fd;
    const double slope = marginal * p.mean_trip_length;  // in flow-density units
    if (fd.shape == FdShape::parabolic) {
        if (slope >= fd.v_f) return {0.0, 0.0};
        const double rho = 0.5 * fd.rho_j * (1.0 - slope / fd.v_f);
        return {rho, rho};
    }
    // Kink multipliers are passed in as B / v_f, so the tie is only exact up to rounding.
    if (std::abs(slope - fd.v_f) <= 1e-12 * fd.v_f) return {0.0, fd.rho_c};
    if (slope > fd.v_f) return {0.0, 0.0};
    return {fd.rho_c, fd.rho_c};
}

}  // namespace

Occupancies weighted_occupancies(double total_inflow, const ReservoirParams& a, const ReservoirParams& b,
                                 double weight_a, double weight_b) {
    if (total_inflow < 0.0) throw DomainError("steady state: negative inflow");
    if (!(weight_a > 0.0 && weight_b > 0.0)) throw DomainError("steady state: weights must be > 0");
    const double cap = steady_capacity(a) + steady_capacity(b);
    if (total_inflow > cap * (1.0 + 1e-12)) {
        throw DomainError("steady state infeasible: inflow " + std::to_string(total_inflow) +
                          " veh/h exceeds combined discharge capacity " + std::to_string(cap) + " veh/h");
    }
    const std::array<const ReservoirParams*, 2> res{&a, &b};
    const std::array<double, 2> w{weight_a, weight_b};

    struct Eval {
        std::array<DensityRange, 2> range;
        double g_lo;
        double g_hi;
    };
    auto eval = [&](double mu) {
        Eval e{};
        e.g_lo = e.g_hi = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            e.range[i] = argmax_density(*res[i], w[i] / mu);
            e.g_lo += steady_outflow(*res[i], e.range[i].lo * res[i]->lane_length);
            e.g_hi += steady_outflow(*res[i], e.range[i].hi * res[i]->lane_length);
        }
        return e;
    };
    auto finish = [&](double mu, const Eval& e) {
        double phi = 0.0;
        if (e.g_hi > e.g_lo) phi = std::clamp((total_inflow - e.g_lo) / (e.g_hi - e.g_lo), 0.0, 1.0);
        Occupancies o;
        o.n_a = (e.range[0].lo + phi * (e.range[0].hi - e.range[0].lo)) * a.lane_length;
        o.n_b = (e.range[1].lo + phi * (e.range[1].hi - e.range[1].lo)) * b.lane_length;
        o.multiplier = mu;
        return o;
    };

    if (total_inflow == 0.0) return {0.0, 0.0, 0.0};

    // Kinks of piecewise-linear outflow curves produce jumps in the total outflow.
    std::vector<double> kinks;
    for (std::size_t i = 0; i < 2; ++i) {
        if (res[i]->fd.shape != FdShape::parabolic) kinks.push_back(w[i] * res[i]->mean_trip_length / res[i]->fd.v_f);
    }
    std::sort(kinks.begin(), kinks.end());
    for (double mu : kinks) {
        const Eval e = eval(mu);
        if (e.g_lo <= total_inflow && total_inflow <= e.g_hi) return finish(mu, e);
    }

    // Otherwise the outflow is continuous in mu around the root.
    double lo = 1e-12, hi = 1.0;
    while (eval(hi).g_lo < total_inflow) {
        hi *= 2.0;
        if (hi > 1e300) return finish(hi, eval(hi));
    }
    for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Eval e = eval(mid);
        if (e.g_lo <= total_inflow && total_inflow <= e.g_hi) return finish(mid, e);
        if (e.g_hi < total_inflow) lo = mid;
        else hi = mid;
    }
    return finish(0.5 * (lo + hi), eval(0.5 * (lo + hi)));
}

Occupancies steady_state_occupancies(double f_a, double f_b, const ReservoirParams& a, const ReservoirParams& b) {
    if (f_a < 0.0 || f_b < 0.0) throw DomainError("steady state: negative inflow");
    return weighted_occupancies(f_a + f_b, a, b, 1.0, 1.0);
}

double risk_surcharge(const ReservoirParams& p, double theta) {
    return theta * p.alpha * (p.gamma + p.beta) / (p.gamma * p.gamma);
}

Occupancies risk_adjusted_occupancies(double f_a, double f_b, const ReservoirParams& a, const ReservoirParams& b,
                                      double theta, double c_t) {
    if (theta < 0.0) throw DomainError("risk adjustment: theta must be >= 0");
    if (!(a.gamma > a.beta) || !(b.gamma > b.beta)) throw DomainError("risk adjustment: requires gamma > beta");
    if (f_a < 0.0 || f_b < 0.0) throw DomainError("steady state: negative inflow");
    return weighted_occupancies(f_a + f_b, a, b, c_t + risk_surcharge(a, theta), c_t + risk_surcharge(b, theta));
}

double gate_offset(const Occupancies& n, double f_a, double f_b, const ReservoirParams& a, const ReservoirParams& b) {
    return 0.5 * (f_a - f_b - steady_outflow(a, n.n_a) + steady_outflow(b, n.n_b));
}

std::pair<double, double> steady_state_gates(const Occupancies& n, double f_a, double f_b, const ReservoirParams& a,
                                             const ReservoirParams& b, double u_bar_ab, double u_bar_ba) {
    const double du = gate_offset(n, f_a, f_b, a, b);
    return {std::clamp(du, 0.0, u_bar_ab), std::clamp(-du, 0.0, u_bar_ba)};
}

double risk_offset_slope(const Occupancies& n0, const ReservoirParams& a, const ReservoirParams& b, double c_t) {
    auto curvature = [](const ReservoirParams& p) {
        if (p.fd.shape != FdShape::parabolic) {
            throw DomainError("first-order risk shift needs strictly concave outflow (parabolic diagram)");
        }
        return -2.0 * p.fd.v_f / (p.fd.rho_j * p.lane_length * p.mean_trip_length);
    };
    const double g1 = steady_outflow_slope_right(a, n0.n_a);
    const double s_a = risk_surcharge(a, 1.0), s_b = risk_surcharge(b, 1.0);
    return -g1 * g1 * (s_a - s_b) / (c_t * (curvature(a) + curvature(b)));
}

}  // namespace riskgate
