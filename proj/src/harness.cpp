#include "riskgate/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

#include "riskgate/rng.hpp"

namespace riskgate {

namespace {

long long steps_for(double span_h, double dt_h) { return std::llround(span_h / dt_h); }

}  // namespace

DemandProfile forecast_profile(const Scenario& sc, std::uint64_t seed) {
    const double eps = sc.demand.forecast_error_bound;
    if (eps <= 0.0) return sc.demand.profile;
    auto rng = make_stream(seed, Stream::forecast);
    std::vector<DemandSegment> segments = sc.demand.profile.segments();
    for (auto& s : segments) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (s.rate > 0.0) s.rate = std::max(0.0, s.rate + eps * (2.0 * u - 1.0));
    }
    return DemandProfile(std::move(segments));
}

GatePolicy steady_policy(const Scenario& sc) {
    const auto& a = sc.reservoir(ReservoirId::A);
    const auto& b = sc.reservoir(ReservoirId::B);
    const double peak = sc.demand.profile.peak();
    const double f_a = sc.demand.share_a * peak;
    const double f_b = (1.0 - sc.demand.share_a) * peak;
    const auto n = risk_adjusted_occupancies(f_a, f_b, a, b, sc.weights.theta, sc.weights.c_t > 0.0 ? sc.weights.c_t : 1.0);
    const auto [u_ab, u_ba] = steady_state_gates(n, f_a, f_b, a, b, sc.gates.u_bar[0], sc.gates.u_bar[1]);
    return GatePolicy::steady(sc, u_ab, u_ba);
}

ThresholdSearch initial_solve(const Scenario& sc, const DemandProfile& forecast) {
    const PredictionModel model(sc, forecast);
    const double t_end = std::min(sc.controller.prediction_min / 60.0, sc.sim.horizon_h());
    return optimize_threshold(sc, model, sc.controller.mode, t_end, objective_weights(sc), search_options(sc));
}

RunResult run_simulation(const Scenario& sc, PolicyKind policy, std::uint64_t seed, const RunOptions& options) {
    RunResult out;
    out.seed = seed;

    TripSimulator sim(sc, seed);
    const DemandProfile forecast = forecast_profile(sc, seed);
    const double dt = sc.sim.dt_h();
    const long long n_steps = steps_for(sc.sim.horizon_h(), dt);
    const long long per_sample = std::max<long long>(1, steps_for(options.sample_interval_h, dt));

    std::optional<MpcController> mpc;
    GatePolicy fixed = GatePolicy::no_control(sc);
    auto measured = [&]() { return PredictionModel::from_measured(sc, forecast, sim.state()); };

    SeriesSample acc;
    long long in_sample = 0;
    try {
        if (policy == PolicyKind::threshold) {
            mpc.emplace(sc, options.trigger);
            mpc->start(measured(), options.initial_solve);
        } else if (policy == PolicyKind::steady_state) {
            fixed = steady_policy(sc);
        }
        for (long long k = 0; k < n_steps; ++k) {
            const double t0 = sim.state().t;
            if (mpc && mpc->wants_tick(t0)) mpc->on_tick(measured());
            const Controls u = mpc ? mpc->controls(t0, t0 + dt) : fixed.average(t0, t0 + dt);
            const StepRecord rec = sim.advance(u, dt);
            if (options.check_conservation && !sim.state().conserved()) {
                throw std::logic_error("vehicle conservation violated at t=" + std::to_string(rec.t));
            }
            if (rec.accidents > 0 && mpc) mpc->on_accident(measured());

            acc.flow_ab += static_cast<double>(rec.transfer_ab);
            acc.flow_ba += static_cast<double>(rec.transfer_ba);
            if (++in_sample == per_sample) {
                const double span = static_cast<double>(in_sample) * dt;
                out.flow_series.push_back(acc.flow_ba / span);
                if (options.keep_series) {
                    acc.t = static_cast<double>(k + 1) * dt;
                    acc.n_a = static_cast<double>(rec.n_a);
                    acc.n_b = static_cast<double>(rec.n_b);
                    acc.v_a = rec.v_a;
                    acc.v_b = rec.v_b;
                    acc.queue_ab = static_cast<double>(rec.queue_ab);
                    acc.queue_ba = static_cast<double>(rec.queue_ba);
                    acc.flow_ab /= span;
                    acc.flow_ba /= span;
                    acc.u_ab = u.u_ab;
                    acc.u_ba = u.u_ba;
                    acc.lambda_a = rec.lambda_a;
                    acc.lambda_b = rec.lambda_b;
                    out.series.push_back(acc);
                }
                acc = SeriesSample{};
                in_sample = 0;
            }
        }
    } catch (const GridlockError& e) {
        out.failed = true;
        out.failure = e.what();
    }

    const auto& state = sim.state();
    const double t_end = state.t;
    double total_time = 0.0;  // h
    for (const Trip& trip : state.trips) {
        if (trip.completion_time) {
            total_time += *trip.completion_time - trip.entry_time;
        } else {
            total_time += t_end - trip.entry_time;
            ++out.unfinished;
        }
    }
    out.entered = state.counters.entered;
    out.accidents = sim.accident_log();
    for (const auto& a : out.accidents) ++out.accidents_by_reservoir[static_cast<std::size_t>(index(a.reservoir))];
    out.accidents_total = out.accidents_by_reservoir[0] + out.accidents_by_reservoir[1];
    if (out.entered > 0) {
        const double vehicles = static_cast<double>(out.entered);
        out.mean_travel_time = total_time * 60.0 / vehicles;
        out.objective_per_vehicle =
            (sc.weights.c_t * total_time * 60.0 + sc.safety_weight() * static_cast<double>(out.accidents_total)) /
            vehicles;
    }
    if (mpc) {
        out.optimizer_invocations = mpc->invocations();
        out.switch_times = mpc->switch_times();
    }
    return out;
}

Stat summarize(const std::vector<double>& xs) {
    Stat s;
    if (xs.empty()) return s;
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / n;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / (n - 1.0));
        s.se = s.sd / std::sqrt(n);
    }
    return s;
}

double pct_change(double value, double baseline) {
    if (baseline == 0.0) return value == 0.0 ? 0.0 : std::copysign(INFINITY, value);
    return 100.0 * (value - baseline) / baseline;
}

Aggregate aggregate(const std::vector<RunResult>& runs) {
    Aggregate agg;
    std::vector<double> tt, obj, acc, acc_a, acc_b, unfinished, inv;
    for (const auto& r : runs) {
        if (r.failed) {
            ++agg.n_failed;
            continue;
        }
        tt.push_back(r.mean_travel_time);
        obj.push_back(r.objective_per_vehicle);
        acc.push_back(static_cast<double>(r.accidents_total));
        acc_a.push_back(static_cast<double>(r.accidents_by_reservoir[0]));
        acc_b.push_back(static_cast<double>(r.accidents_by_reservoir[1]));
        unfinished.push_back(static_cast<double>(r.unfinished));
        inv.push_back(static_cast<double>(r.optimizer_invocations));
        if (agg.mean_flow_series.size() < r.flow_series.size()) agg.mean_flow_series.resize(r.flow_series.size(), 0.0);
        for (std::size_t i = 0; i < r.flow_series.size(); ++i) agg.mean_flow_series[i] += r.flow_series[i];
    }
    agg.n_runs = static_cast<int>(tt.size());
    for (double& f : agg.mean_flow_series) f /= static_cast<double>(std::max(1, agg.n_runs));
    agg.travel_time = summarize(tt);
    agg.objective = summarize(obj);
    agg.accidents = summarize(acc);
    agg.accidents_a = summarize(acc_a);
    agg.accidents_b = summarize(acc_b);
    agg.unfinished = summarize(unfinished);
    agg.invocations = summarize(inv);
    return agg;
}

McResult run_monte_carlo(const Scenario& sc, const McOptions& options) {
    if (options.n_runs < 1) throw HarnessError("Monte Carlo needs at least one run");
    McResult out;
    out.runs.resize(static_cast<std::size_t>(options.n_runs));

    // With an exact forecast every run starts from the same empty network, so the t = 0 solve is shared.
    std::optional<ThresholdSearch> shared;
    if (options.policy == PolicyKind::threshold && sc.demand.forecast_error_bound <= 0.0) {
        shared = initial_solve(sc, sc.demand.profile);
    }
    RunOptions run_opts;
    run_opts.trigger = options.trigger;
    run_opts.initial_solve = shared ? &*shared : nullptr;

    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&]() {
        for (int i = next++; i < options.n_runs; i = next++) {
            try {
                out.runs[static_cast<std::size_t>(i)] =
                    run_simulation(sc, options.policy, options.base_seed + static_cast<std::uint64_t>(i), run_opts);
            } catch (...) {
                // Invariant violations are bugs, not failed runs: stop the batch and rethrow on the caller.
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next = options.n_runs;
            }
        }
    };
    int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, options.n_runs);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    out.aggregate = aggregate(out.runs);
    if (out.aggregate.n_failed > 0) {
        std::cerr << "warning: " << out.aggregate.n_failed << " of " << options.n_runs
                  << " runs failed and were excluded\n";
    }
    if (static_cast<double>(out.aggregate.n_failed) > options.max_failed_fraction * options.n_runs) {
        std::string first;
        for (const auto& r : out.runs) {
            if (r.failed) {
                first = "seed " + std::to_string(r.seed) + ": " + r.failure;
                break;
            }
        }
        throw HarnessError(std::to_string(out.aggregate.n_failed) + " of " + std::to_string(options.n_runs) +
                           " runs failed (limit " + std::to_string(options.max_failed_fraction * 100.0) +
                           "%); first failure " + first);
    }
    return out;
}

Scenario with_tradeoff(const Scenario& sc, double lambda_tradeoff) {
    Scenario copy = sc;
    copy.weights.lambda_tradeoff = lambda_tradeoff;
    return copy;
}

Scenario with_theta(const Scenario& sc, double theta) {
    Scenario copy = sc;
    copy.weights.theta = theta;
    return copy;
}

std::vector<FrontierPoint> theta_frontier(const Scenario& sc, const std::vector<double>& thetas, int mc_runs,
                                          std::uint64_t base_seed, int threads) {
    std::vector<FrontierPoint> out;
    for (double theta : thetas) {
        const Scenario cell = with_theta(sc, theta);
        const auto solve = initial_solve(cell, cell.demand.profile);
        FrontierPoint p;
        p.theta = theta;
        p.predicted_mean = solve.best.m_end;
        p.predicted_std = std::sqrt(std::max(0.0, solve.best.var_end));
        p.t_star = solve.policy.t_star;
        if (mc_runs > 0) {
            McOptions mo;
            mo.n_runs = mc_runs;
            mo.base_seed = base_seed;
            mo.threads = threads;
            const auto agg = run_monte_carlo(cell, mo).aggregate;
            p.mc_accidents = agg.accidents;
        }
        out.push_back(p);
    }
    return out;
}

SweepResult sweep(const std::vector<std::pair<std::string, Scenario>>& rates, const SweepOptions& options) {
    if (rates.empty() || options.weights.empty()) throw HarnessError("sweep needs at least one rate and one weight");
    SweepResult out;
    for (const auto& [name, sc] : rates) {
        out.rates.push_back(name);
        McOptions mo;
        mo.n_runs = options.n_runs;
        mo.base_seed = options.base_seed;
        mo.threads = options.threads;
        mo.policy = PolicyKind::no_control;
        out.baselines.push_back(run_monte_carlo(sc, mo).aggregate);
        mo.policy = PolicyKind::threshold;
        for (double w : options.weights) {
            out.cells.push_back({name, w, run_monte_carlo(with_tradeoff(sc, w), mo).aggregate});
        }
    }
    if (!options.thetas.empty()) {
        out.frontier = theta_frontier(rates.front().second, options.thetas, options.frontier_runs, options.base_seed,
                                      options.threads);
    }
    return out;
}

DeterministicLoop run_deterministic_loop(const Scenario& sc, TriggerKind trigger) {
    DeterministicLoop out;
    PredictionModel plant(sc, sc.demand.profile);
    MpcController mpc(sc, trigger);
    mpc.start(plant);
    const double dt = sc.controller.rollout_dt_s / 3600.0;
    const double horizon = sc.sim.horizon_h();
    while (plant.t() < horizon - 1e-12) {
        const double t0 = plant.t();
        const double h = std::min(dt, horizon - t0);
        if (mpc.wants_tick(t0)) mpc.on_tick(plant);
        const Controls u = mpc.controls(t0, t0 + h);
        plant.step(u, h);
        out.controls.push_back(u);
        if (plant.gridlocked()) throw GridlockError("deterministic plant gridlocked");
    }
    out.switch_times = mpc.switch_times();
    out.invocations = mpc.invocations();
    return out;
}

}  // namespace riskgate
