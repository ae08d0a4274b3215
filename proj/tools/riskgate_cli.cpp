// Command-line front end: simulate, mc, sweep, steady-state, validate.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riskgate/harness.hpp"
#include "riskgate/io.hpp"

using namespace riskgate;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kConfigError = 2;

struct Common {
    std::string config;
    std::string out = "out";
    long long seed = -1;
    int runs = 0;
    std::string policy;
    std::string mode;
    std::string trigger;
    int threads = 0;
};

Scenario load(const Common& c) {
    Scenario sc = parse_scenario(c.config);
    if (!c.policy.empty()) sc.controller.policy = parse_policy_kind(c.policy);
    if (!c.mode.empty()) sc.controller.mode = parse_threshold_mode(c.mode);
    if (!c.trigger.empty()) sc.controller.trigger = parse_trigger_kind(c.trigger);
    if (c.runs > 0) sc.mc.n_runs = c.runs;
    if (c.seed >= 0) sc.mc.base_seed = static_cast<std::uint64_t>(c.seed);
    return sc;
}

std::vector<std::pair<double, double>> as_points(const std::vector<double>& ys, double interval_min) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < ys.size(); ++i) pts.emplace_back(static_cast<double>(i + 1) * interval_min, ys[i]);
    return pts;
}

std::string flow_chart(const std::vector<double>& controlled, const std::vector<double>& baseline) {
    return svg_line_chart("Transfer flow B to A", "time (min)", "veh/h",
                          {{"controlled", as_points(controlled, 1.0)}, {"uncontrolled", as_points(baseline, 1.0)}});
}

int cmd_validate(const Common& c) {
    const Scenario sc = parse_scenario(c.config);
    std::printf("%s: ok (L_A=%g lane-km, L_B=%g lane-km, %g vehicles, horizon %g min)\n", sc.name.c_str(),
                sc.reservoirs[0].lane_length, sc.reservoirs[1].lane_length, sc.total_vehicles(), sc.sim.horizon_min);
    return kOk;
}

int cmd_simulate(const Common& c, bool trace) {
    const Scenario sc = load(c);
    const std::uint64_t seed = sc.mc.base_seed;
    RunOptions opts;
    opts.trigger = sc.controller.trigger;
    opts.keep_series = true;
    const RunResult run = run_simulation(sc, sc.controller.policy, seed, opts);
    if (run.failed) throw std::runtime_error("run failed: " + run.failure);

    OutputBundle out(c.out);
    out.write("runs.csv", runs_csv({run}));
    out.write("series.csv", series_csv(run.series));
    out.write("accidents.csv", accidents_csv(run.accidents));
    if (trace && sc.controller.policy == PolicyKind::threshold) {
        SearchOptions so = search_options(sc);
        so.keep_trace = true;
        const PredictionModel model(sc, sc.demand.profile);
        const auto search = optimize_threshold(sc, model, sc.controller.mode,
                                               std::min(sc.controller.prediction_min / 60.0, sc.sim.horizon_h()),
                                               objective_weights(sc), so);
        out.write("optimizer_trace.csv", trace_csv(search.trace));
    }
    std::vector<std::pair<double, double>> flow;
    for (const auto& s : run.series) flow.emplace_back(s.t * 60.0, s.flow_ba);
    out.write("flow.svg", svg_line_chart("Transfer flow B to A", "time (min)", "veh/h", {{"run", flow}}));
    out.commit();
    std::printf("seed %llu  policy %s  travel time %.3f min  objective %.3f min/veh  accidents %lld  switches %zu\n",
                static_cast<unsigned long long>(seed), std::string(to_string(sc.controller.policy)).c_str(),
                run.mean_travel_time, run.objective_per_vehicle, run.accidents_total, run.switch_times.size());
    return kOk;
}

int cmd_mc(const Common& c) {
    const Scenario sc = load(c);
    McOptions mo;
    mo.n_runs = sc.mc.n_runs;
    mo.base_seed = sc.mc.base_seed;
    mo.threads = c.threads;
    mo.trigger = sc.controller.trigger;
    mo.policy = PolicyKind::no_control;
    const McResult baseline = run_monte_carlo(sc, mo);
    mo.policy = sc.controller.policy;
    const McResult controlled = mo.policy == PolicyKind::no_control ? baseline : run_monte_carlo(sc, mo);

    SweepResult table;
    table.rates = {sc.name};
    table.baselines = {baseline.aggregate};
    table.cells = {{sc.name, sc.weights.lambda_tradeoff.value_or(sc.weights.c_s), controlled.aggregate}};

    OutputBundle out(c.out);
    out.write("runs.csv", runs_csv(controlled.runs));
    out.write("baseline_runs.csv", runs_csv(baseline.runs));
    out.write("aggregate.csv", aggregate_csv({{"baseline", baseline.aggregate},
                                              {std::string(to_string(mo.policy)), controlled.aggregate}},
                                             &baseline.aggregate));
    out.write("tables.md", tables_markdown(table));
    out.write("flow_comparison.csv",
              flow_comparison_csv(controlled.aggregate.mean_flow_series, baseline.aggregate.mean_flow_series, 1.0 / 60.0));
    out.write("flow_comparison.svg", flow_chart(controlled.aggregate.mean_flow_series, baseline.aggregate.mean_flow_series));
    out.commit();

    const auto& a = controlled.aggregate;
    const auto& b = baseline.aggregate;
    std::printf("%d runs  travel time %.3f (%+.1f%%)  objective %.3f (%+.1f%%)  accidents %.3f (%+.1f%%)\n", a.n_runs,
                a.travel_time.mean, pct_change(a.travel_time.mean, b.travel_time.mean), a.objective.mean,
                pct_change(a.objective.mean, b.objective.mean), a.accidents.mean,
                pct_change(a.accidents.mean, b.accidents.mean));
    return kOk;
}

int cmd_sweep(const Common& c, const std::string& high_config, const std::vector<double>& weights,
              std::vector<double> thetas, int frontier_runs) {
    const Scenario base = load(c);
    std::vector<std::pair<std::string, Scenario>> rates{{"base", base}};
    if (!high_config.empty()) {
        Common hc = c;
        hc.config = high_config;
        rates.emplace_back("high", load(hc));
    }
    if (thetas.empty()) {
        for (int i = 0; i <= 20; ++i) thetas.push_back(0.05 * i);
    }
    SweepOptions so;
    so.weights = weights;
    so.thetas = thetas;
    so.n_runs = base.mc.n_runs;
    so.base_seed = base.mc.base_seed;
    so.frontier_runs = frontier_runs;
    so.threads = c.threads;
    const SweepResult result = sweep(rates, so);

    std::vector<std::pair<std::string, Aggregate>> rows;
    for (std::size_t k = 0; k < result.rates.size(); ++k) rows.emplace_back(result.rates[k] + "/baseline", result.baselines[k]);
    for (const auto& cell : result.cells) {
        char label[64];
        std::snprintf(label, sizeof label, "%s/weight=%.6g", cell.rate.c_str(), cell.weight);
        rows.emplace_back(label, cell.controlled);
    }

    OutputBundle out(c.out);
    out.write("tables.md", tables_markdown(result));
    out.write("aggregate.csv", aggregate_csv(rows));
    out.write("frontier.csv", frontier_csv(result.frontier));
    std::vector<std::pair<double, double>> predicted, simulated;
    for (const auto& p : result.frontier) {
        predicted.emplace_back(p.predicted_std, p.predicted_mean);
        if (p.mc_accidents) simulated.emplace_back(p.mc_accidents->sd, p.mc_accidents->mean);
    }
    std::vector<ChartSeries> frontier_series{{"predicted", predicted}};
    if (!simulated.empty()) frontier_series.push_back({"simulated", simulated});
    out.write("frontier.svg", svg_line_chart("Accident mean vs std over theta", "std of accidents", "mean accidents",
                                             frontier_series));
    // Flow figure: base rate, cell closest to weight 1/3.
    const SweepCell* flow_cell = nullptr;
    for (const auto& cell : result.cells) {
        if (cell.rate == "base" && (!flow_cell || std::abs(cell.weight - 1.0 / 3.0) < std::abs(flow_cell->weight - 1.0 / 3.0))) {
            flow_cell = &cell;
        }
    }
    if (flow_cell) {
        const auto& ctrl = flow_cell->controlled.mean_flow_series;
        const auto& bl = result.baselines.front().mean_flow_series;
        out.write("flow_comparison.csv", flow_comparison_csv(ctrl, bl, 1.0 / 60.0));
        out.write("flow_comparison.svg", flow_chart(ctrl, bl));
    }
    out.commit();
    std::cout << tables_markdown(result);
    return kOk;
}

int cmd_steady(const Common& c, double f_a, double f_b, double theta) {
    const Scenario sc = parse_scenario(c.config);
    const auto& a = sc.reservoir(ReservoirId::A);
    const auto& b = sc.reservoir(ReservoirId::B);
    const double c_t = sc.weights.c_t > 0.0 ? sc.weights.c_t : 1.0;
    const Occupancies n = risk_adjusted_occupancies(f_a, f_b, a, b, theta, c_t);
    const auto [u_ab, u_ba] = steady_state_gates(n, f_a, f_b, a, b, sc.gates.u_bar[0], sc.gates.u_bar[1]);
    std::printf("N_A* = %.6f veh\nN_B* = %.6f veh\ndelta_u* = %.6f veh/h\nu_AB* = %.6f veh/h\nu_BA* = %.6f veh/h\n", n.n_a,
                n.n_b, gate_offset(n, f_a, f_b, a, b), u_ab, u_ba);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-reservoir perimeter-control simulator with accident feedback"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub, bool full) {
        sub->add_option("--config", common.config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
        if (!full) return;
        sub->add_option("--out", common.out, "Output directory");
        sub->add_option("--seed", common.seed, "Seed (simulate) or base seed (mc, sweep)");
        sub->add_option("--runs", common.runs, "Monte-Carlo runs");
        sub->add_option("--policy", common.policy, "none, threshold or steady")
            ->check(CLI::IsMember({"none", "threshold", "steady"}));
        sub->add_option("--mode", common.mode, "open_until or closed_until")
            ->check(CLI::IsMember({"open_until", "closed_until"}));
        sub->add_option("--trigger", common.trigger, "event or periodic")->check(CLI::IsMember({"event", "periodic"}));
        sub->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
    };

    auto* simulate = app.add_subcommand("simulate", "Run one seeded simulation");
    add_common(simulate, true);
    bool trace = false;
    simulate->add_flag("--trace", trace, "Also dump the t = 0 optimizer trace");

    auto* mc = app.add_subcommand("mc", "Monte-Carlo batch against the uncontrolled baseline");
    add_common(mc, true);

    auto* sweep_cmd = app.add_subcommand("sweep", "Weight x accident-rate matrix and theta frontier");
    add_common(sweep_cmd, true);
    std::string high_config;
    std::vector<double> weights{0.0, 1.0 / 3.0, 2.0 / 3.0};
    std::vector<double> thetas;
    int frontier_runs = 0;
    sweep_cmd->add_option("--high-config", high_config, "Scenario for the high accident rate")->check(CLI::ExistingFile);
    sweep_cmd->add_option("--weights", weights, "lambda trade-off values (min per accident)");
    sweep_cmd->add_option("--thetas", thetas, "theta values for the frontier (default 0, 0.05, ..., 1)");
    sweep_cmd->add_option("--frontier-runs", frontier_runs, "Monte-Carlo runs per frontier point (0 = predictions only)");

    auto* steady = app.add_subcommand("steady-state", "Analytic steady-state occupancies and gates");
    add_common(steady, false);
    double f_a = 0.0, f_b = 0.0, theta = 0.0;
    steady->add_option("--fa", f_a, "Inflow into A, veh/h")->required();
    steady->add_option("--fb", f_b, "Inflow into B, veh/h")->required();
    steady->add_option("--theta", theta, "Risk aversion");

    auto* validate = app.add_subcommand("validate", "Parse and check a scenario file");
    add_common(validate, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*validate) return cmd_validate(common);
        if (*simulate) return cmd_simulate(common, trace);
        if (*mc) return cmd_mc(common);
        if (*sweep_cmd) return cmd_sweep(common, high_config, weights, thetas, frontier_runs);
        if (*steady) return cmd_steady(common, f_a, f_b, theta);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
    return kRuntimeFailure;
}
