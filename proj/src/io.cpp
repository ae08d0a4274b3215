#include "riskgate/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace riskgate {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Reading

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    double number(const std::string& key) const {
        if (!has(key)) throw ConfigError(field(key), "required field is missing");
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
        return x;
    }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    long long integer(const std::string& key, long long fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
        return v.get<long long>();
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
        return v.get<std::string>();
    }

    Reader child(const std::string& key) const {
        if (!has(key)) throw ConfigError(field(key), "required section is missing");
        return Reader(j_.at(key), field(key));
    }

    const json& raw(const std::string& key) const {
        seen_.insert(key);
        return j_.at(key);
    }

    /// Rejects keys nobody asked for, which are almost always typos.
    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(field(key), "unknown field");
        }
    }

private:
    const json& j_;
    std::string path_;
    mutable std::set<std::string> seen_;
};

template <typename F>
auto wrap(const std::string& field, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(field, e.what());
    }
}

FundamentalDiagram read_fd(const Reader& r) {
    const FdShape shape = wrap(r.field("shape"), [&] { return parse_fd_shape(r.text("shape", "triangular")); });
    const double v_f = r.number("v_f");
    const double rho_j = r.number("rho_j");
    FundamentalDiagram fd;
    switch (shape) {
        case FdShape::triangular: {
            const double q_max = r.number("q_max");
            fd = wrap(r.field("q_max"), [&] { return FundamentalDiagram::triangular(v_f, rho_j, q_max); });
            break;
        }
        case FdShape::trapezoidal: {
            const double w = r.number("w");
            const double q_max = r.number("q_max");
            fd = wrap(r.field("q_max"), [&] { return FundamentalDiagram::trapezoidal(v_f, w, rho_j, q_max); });
            break;
        }
        case FdShape::parabolic:
            fd = wrap(r.field("rho_j"), [&] { return FundamentalDiagram::parabolic(v_f, rho_j); });
            break;
    }
    r.finish();
    return fd;
}

ReservoirParams read_reservoir(const Reader& r, ReservoirId id) {
    ReservoirParams p;
    p.id = id;
    p.lane_length = r.number("lane_length_km");
    p.fd = read_fd(r.child("fd"));
    p.alpha = r.number("alpha");
    p.beta = r.number("beta");
    p.gamma = r.number("gamma");
    p.eta = r.number("eta");
    p.kappa = r.number("kappa");
    p.mean_trip_length = r.number("mean_trip_length_km");
    r.finish();
    return p;
}

TripLengthDist read_length(const Reader& r) {
    TripLengthDist d{r.number("mean"), r.number("std")};
    r.finish();
    return d;
}

DemandModel read_demand(const Reader& r) {
    DemandModel d;
    const json& profile = r.raw("profile");
    if (!profile.is_array() || profile.empty()) throw ConfigError(r.field("profile"), "expected a non-empty array");
    std::vector<DemandSegment> segments;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const Reader seg(profile[i], r.field("profile[" + std::to_string(i) + "]"));
        segments.push_back({seg.number("start_min") / 60.0, seg.number("rate_veh_h")});
        seg.finish();
    }
    d.profile = wrap(r.field("profile"), [&] { return DemandProfile(std::move(segments)); });
    d.share_a = r.number("share_A");
    if (r.has("od_shares")) {
        const Reader od = r.child("od_shares");
        d.od = {od.number("AA"), od.number("AB"), od.number("BA"), od.number("BB")};
        od.finish();
    }
    d.detour_enabled = r.boolean("detour_enabled", false);
    d.detour_elasticity = r.number("detour_elasticity", 0.0);
    const Reader lengths = r.child("trip_lengths_km");
    d.lengths[static_cast<int>(LegClass::internal_a)] = read_length(lengths.child("internal_A"));
    d.lengths[static_cast<int>(LegClass::leg_b)] = read_length(lengths.child("leg_B"));
    d.lengths[static_cast<int>(LegClass::cross_a)] = read_length(lengths.child("cross_A"));
    lengths.finish();
    d.forecast_error_bound = r.number("forecast_error_bound", 0.0);
    if (r.has("demand_ceiling")) {
        const Reader c = r.child("demand_ceiling");
        d.demand_ceiling = {c.number("A", 0.0), c.number("B", 0.0)};
        c.finish();
    }
    r.finish();
    return d;
}

GateConfig read_gates(const Reader& r) {
    GateConfig g;
    for (Gate gate : {Gate::ab, Gate::ba}) {
        const std::string key(to_string(gate));
        if (!r.has(key)) continue;
        const Reader gr = r.child(key);
        const auto i = static_cast<std::size_t>(index(gate));
        g.u_bar[i] = gr.number("u_bar", g.u_bar[i]);
        g.u_min[i] = gr.number("u_min", g.u_min[i]);
        gr.finish();
    }
    g.controlled = wrap(r.field("controlled"), [&] { return parse_gate(r.text("controlled", "BA")); });
    g.perimeter_length_km = r.number("perimeter_length_km", 0.0);
    r.finish();
    return g;
}

CostWeights read_weights(const Reader& r) {
    CostWeights w;
    w.c_t = r.number("c_T", 1.0);
    w.theta = r.number("theta", 0.0);
    const bool has_cs = r.has("c_S");
    const bool has_lambda = r.has("lambda_tradeoff");
    if (has_cs && has_lambda) {
        throw ConfigError(r.field("c_S"), "set either c_S or lambda_tradeoff, not both (c_S is derived from lambda)");
    }
    if (has_cs) w.c_s = r.number("c_S");
    if (has_lambda) w.lambda_tradeoff = r.number("lambda_tradeoff");
    r.finish();
    return w;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i < std::min(e.byte > 0 ? e.byte - 1 : 0, text.size()); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ConfigError("", "JSON parse error at line " + std::to_string(line) + ", column " +
                                  std::to_string(column) + ": " + e.what());
    }

    const Reader root(doc, "");
    Scenario sc;
    sc.name = root.text("name", "scenario");
    const Reader res = root.child("reservoirs");
    sc.reservoirs[0] = read_reservoir(res.child("A"), ReservoirId::A);
    sc.reservoirs[1] = read_reservoir(res.child("B"), ReservoirId::B);
    res.finish();
    sc.demand = read_demand(root.child("demand"));
    if (root.has("gates")) sc.gates = read_gates(root.child("gates"));
    if (root.has("weights")) sc.weights = read_weights(root.child("weights"));
    if (root.has("sim")) {
        const Reader r = root.child("sim");
        sc.sim.dt_s = r.number("dt_s", sc.sim.dt_s);
        sc.sim.horizon_min = r.number("horizon_min", sc.sim.horizon_min);
        sc.sim.clearance_min = r.number("clearance_min", sc.sim.clearance_min);
        r.finish();
    }
    if (root.has("controller")) {
        const Reader r = root.child("controller");
        auto& c = sc.controller;
        c.policy = wrap(r.field("policy"), [&] { return parse_policy_kind(r.text("policy", "threshold")); });
        c.mode = wrap(r.field("mode"), [&] { return parse_threshold_mode(r.text("mode", "closed_until")); });
        c.trigger = wrap(r.field("trigger"), [&] { return parse_trigger_kind(r.text("trigger", "event")); });
        c.tau_c_s = r.number("tau_c_s", c.tau_c_s);
        c.prediction_min = r.number("H_p_min", c.prediction_min);
        c.rollout_dt_s = r.number("rollout_dt_s", c.rollout_dt_s);
        c.length_bins = static_cast<int>(r.integer("length_bins", c.length_bins));
        c.coarse_grid_s = r.number("coarse_grid_s", c.coarse_grid_s);
        c.refine_tol_s = r.number("refine_tol_s", c.refine_tol_s);
        r.finish();
    }
    if (root.has("mc")) {
        const Reader r = root.child("mc");
        sc.mc.n_runs = static_cast<int>(r.integer("n_runs", sc.mc.n_runs));
        const long long seed = r.integer("base_seed", static_cast<long long>(sc.mc.base_seed));
        if (seed < 0) throw ConfigError(r.field("base_seed"), "must be >= 0");
        sc.mc.base_seed = static_cast<std::uint64_t>(seed);
        r.finish();
    }
    root.finish();
    sc.validate();
    return sc;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

// ---------------------------------------------------------------------------
// Writing

namespace {

json fd_json(const FundamentalDiagram& fd) {
    json j;
    j["shape"] = std::string(to_string(fd.shape));
    j["v_f"] = fd.v_f;
    j["rho_j"] = fd.rho_j;
    if (fd.shape != FdShape::parabolic) j["q_max"] = fd.q_max;
    if (fd.shape == FdShape::trapezoidal) j["w"] = fd.w;
    return j;
}

json reservoir_json(const ReservoirParams& p) {
    json j;
    j["lane_length_km"] = p.lane_length;
    j["fd"] = fd_json(p.fd);
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    j["gamma"] = p.gamma;
    j["eta"] = p.eta;
    j["kappa"] = p.kappa;
    j["mean_trip_length_km"] = p.mean_trip_length;
    return j;
}

json length_json(const TripLengthDist& d) { return json{{"mean", d.mean}, {"std", d.std}}; }

}  // namespace

std::string serialize_scenario(const Scenario& sc) {
    json j;
    j["name"] = sc.name;
    j["reservoirs"]["A"] = reservoir_json(sc.reservoirs[0]);
    j["reservoirs"]["B"] = reservoir_json(sc.reservoirs[1]);

    const auto& d = sc.demand;
    json profile = json::array();
    for (const auto& s : d.profile.segments()) profile.push_back({{"start_min", s.start * 60.0}, {"rate_veh_h", s.rate}});
    j["demand"]["profile"] = profile;
    j["demand"]["share_A"] = d.share_a;
    j["demand"]["od_shares"] = {{"AA", d.od.aa}, {"AB", d.od.ab}, {"BA", d.od.ba}, {"BB", d.od.bb}};
    j["demand"]["detour_enabled"] = d.detour_enabled;
    j["demand"]["detour_elasticity"] = d.detour_elasticity;
    j["demand"]["trip_lengths_km"] = {{"internal_A", length_json(d.length(LegClass::internal_a))},
                                      {"leg_B", length_json(d.length(LegClass::leg_b))},
                                      {"cross_A", length_json(d.length(LegClass::cross_a))}};
    j["demand"]["forecast_error_bound"] = d.forecast_error_bound;
    j["demand"]["demand_ceiling"] = {{"A", d.demand_ceiling[0]}, {"B", d.demand_ceiling[1]}};

    for (Gate g : {Gate::ab, Gate::ba}) {
        const auto i = static_cast<std::size_t>(index(g));
        j["gates"][std::string(to_string(g))] = {{"u_bar", sc.gates.u_bar[i]}, {"u_min", sc.gates.u_min[i]}};
    }
    j["gates"]["controlled"] = std::string(to_string(sc.gates.controlled));
    j["gates"]["perimeter_length_km"] = sc.gates.perimeter_length_km;

    j["weights"]["c_T"] = sc.weights.c_t;
    if (sc.weights.lambda_tradeoff) j["weights"]["lambda_tradeoff"] = *sc.weights.lambda_tradeoff;
    else j["weights"]["c_S"] = sc.weights.c_s;
    j["weights"]["theta"] = sc.weights.theta;

    j["sim"] = {{"dt_s", sc.sim.dt_s}, {"horizon_min", sc.sim.horizon_min}, {"clearance_min", sc.sim.clearance_min}};
    const auto& c = sc.controller;
    j["controller"] = {{"policy", std::string(to_string(c.policy))},
                       {"mode", std::string(to_string(c.mode))},
                       {"trigger", std::string(to_string(c.trigger))},
                       {"tau_c_s", c.tau_c_s},
                       {"H_p_min", c.prediction_min},
                       {"rollout_dt_s", c.rollout_dt_s},
                       {"length_bins", c.length_bins},
                       {"coarse_grid_s", c.coarse_grid_s},
                       {"refine_tol_s", c.refine_tol_s}};
    j["mc"] = {{"n_runs", sc.mc.n_runs}, {"base_seed", sc.mc.base_seed}};
    return j.dump(2) + "\n";
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable& CsvTable::row() {
    rows_.emplace_back();
    return *this;
}

CsvTable& CsvTable::cell(double x) {
    rows_.back().push_back(format_number(x));
    return *this;
}

CsvTable& CsvTable::cell(long long x) {
    rows_.back().push_back(std::to_string(x));
    return *this;
}

CsvTable& CsvTable::cell(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        rows_.back().push_back(s);
        return *this;
    }
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    rows_.back().push_back(q + "\"");
    return *this;
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<ChartSeries>& series) {
    constexpr double W = 720, H = 420, left = 70, right = 20, top = 40, bottom = 55;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (!(x1 > x0)) {
        x0 = std::isfinite(x0) ? x0 - 1 : 0;
        x1 = x0 + 2;
    }
    if (!(y1 > y0)) {
        y0 = std::isfinite(y0) ? y0 - 1 : 0;
        y1 = y0 + 2;
    }
    y0 = std::min(y0, 0.0);
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
    auto py = [&](double y) { return H - bottom - (y - y0) / (y1 - y0) * (H - top - bottom); };
    auto esc = [](const std::string& s) {
        std::string o;
        for (char c : s) {
            if (c == '<') o += "&lt;";
            else if (c == '>') o += "&gt;";
            else if (c == '&') o += "&amp;";
            else o += c;
        }
        return o;
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
        char bx[32], by[32];
        std::snprintf(bx, sizeof bx, "%.4g", xv);
        std::snprintf(by, sizeof by, "%.4g", yv);
        o << "<text x=\"" << px(xv) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">" << bx << "</text>\n";
        o << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << by << "</text>\n";
    }
    o << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << esc(x_label) << "</text>\n";
    o << "<text x=\"16\" y=\"" << (top + H - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (top + H - bottom) / 2 << ")\">" << esc(y_label) << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = colors[k % 5];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[k].points) {
            if (std::isfinite(x) && std::isfinite(y)) o << px(x) << ',' << py(y) << ' ';
        }
        o << "\"/>\n";
        const double ly = top + 14.0 * static_cast<double>(k);
        o << "<line x1=\"" << W - right - 150 << "\" y1=\"" << ly << "\" x2=\"" << W - right - 130 << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << W - right - 125 << "\" y=\"" << ly + 4 << "\">" << esc(series[k].label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

OutputBundle::OutputBundle(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::exists(dir_)) {
        std::filesystem::create_directories(dir_);
        created_dir_ = true;
    }
}

OutputBundle::~OutputBundle() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) std::filesystem::remove(dir_ / f, ec);
    if (created_dir_ && std::filesystem::is_empty(dir_, ec)) std::filesystem::remove(dir_, ec);
}

void OutputBundle::write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

void OutputBundle::commit() {
    json manifest = json::array();
    for (const auto& name : files_) {
        std::ifstream in(dir_ / name, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        const std::string bytes = ss.str();
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
        manifest.push_back({{"file", name}, {"bytes", bytes.size()}, {"fnv1a64", hex}});
    }
    std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
    out << json{{"files", manifest}}.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write manifest");
    committed_ = true;
}

// ---------------------------------------------------------------------------
// Tables

std::string runs_csv(const std::vector<RunResult>& runs) {
    CsvTable t({"seed", "failed", "mean_travel_time_min", "objective_per_vehicle_min", "accidents_total", "accidents_A",
                "accidents_B", "entered", "unfinished", "optimizer_invocations", "switch_times_min"});
    for (const auto& r : runs) {
        std::string switches;
        for (double s : r.switch_times) switches += (switches.empty() ? "" : " ") + format_number(s * 60.0);
        t.row()
            .cell(static_cast<long long>(r.seed))
            .cell(static_cast<long long>(r.failed))
            .cell(r.mean_travel_time)
            .cell(r.objective_per_vehicle)
            .cell(r.accidents_total)
            .cell(r.accidents_by_reservoir[0])
            .cell(r.accidents_by_reservoir[1])
            .cell(r.entered)
            .cell(r.unfinished)
            .cell(static_cast<long long>(r.optimizer_invocations))
            .cell(switches);
    }
    return t.str();
}

std::string aggregate_csv(const std::vector<std::pair<std::string, Aggregate>>& rows, const Aggregate* baseline) {
    CsvTable t({"label", "n_runs", "n_failed", "metric", "mean", "se", "sd", "pct_change_vs_baseline"});
    for (const auto& [label, agg] : rows) {
        const std::vector<std::tuple<std::string, Stat, const Stat*>> metrics{
            {"mean_travel_time_min", agg.travel_time, baseline ? &baseline->travel_time : nullptr},
            {"objective_per_vehicle_min", agg.objective, baseline ? &baseline->objective : nullptr},
            {"accidents_total", agg.accidents, baseline ? &baseline->accidents : nullptr},
            {"accidents_A", agg.accidents_a, baseline ? &baseline->accidents_a : nullptr},
            {"accidents_B", agg.accidents_b, baseline ? &baseline->accidents_b : nullptr},
            {"unfinished", agg.unfinished, baseline ? &baseline->unfinished : nullptr},
            {"optimizer_invocations", agg.invocations, nullptr},
        };
        for (const auto& [name, s, base] : metrics) {
            t.row()
                .cell(label)
                .cell(static_cast<long long>(agg.n_runs))
                .cell(static_cast<long long>(agg.n_failed))
                .cell(name)
                .cell(s.mean)
                .cell(s.se)
                .cell(s.sd);
            if (base) t.cell(pct_change(s.mean, base->mean));
            else t.cell(std::string());
        }
    }
    return t.str();
}

std::string series_csv(const std::vector<SeriesSample>& series) {
    CsvTable t({"t_min", "n_A", "n_B", "v_A_kmh", "v_B_kmh", "queue_AB", "queue_BA", "flow_AB_veh_h", "flow_BA_veh_h",
                "u_AB_veh_h", "u_BA_veh_h", "lambda_A_per_h", "lambda_B_per_h"});
    for (const auto& s : series) {
        t.row()
            .cell(s.t * 60.0)
            .cell(s.n_a)
            .cell(s.n_b)
            .cell(s.v_a)
            .cell(s.v_b)
            .cell(s.queue_ab)
            .cell(s.queue_ba)
            .cell(s.flow_ab)
            .cell(s.flow_ba)
            .cell(s.u_ab)
            .cell(s.u_ba)
            .cell(s.lambda_a)
            .cell(s.lambda_b);
    }
    return t.str();
}

std::string accidents_csv(const std::vector<AccidentRecord>& accidents) {
    CsvTable t({"t_min", "reservoir", "lambda_per_h", "chi_after"});
    for (const auto& a : accidents) {
        t.row().cell(a.t * 60.0).cell(std::string(to_string(a.reservoir))).cell(a.lambda).cell(a.chi_after);
    }
    return t.str();
}

std::string flow_comparison_csv(const std::vector<double>& controlled, const std::vector<double>& baseline,
                                double interval_h) {
    CsvTable t({"t_min", "controlled_flow_BA_veh_h", "baseline_flow_BA_veh_h"});
    const std::size_t n = std::max(controlled.size(), baseline.size());
    for (std::size_t i = 0; i < n; ++i) {
        t.row()
            .cell(static_cast<double>(i + 1) * interval_h * 60.0)
            .cell(i < controlled.size() ? controlled[i] : NAN)
            .cell(i < baseline.size() ? baseline[i] : NAN);
    }
    return t.str();
}

std::string frontier_csv(const std::vector<FrontierPoint>& frontier) {
    CsvTable t({"theta", "t_star_min", "predicted_mean_accidents", "predicted_std_accidents", "mc_mean_accidents",
                "mc_std_accidents", "mc_se_mean"});
    for (const auto& p : frontier) {
        t.row().cell(p.theta).cell(p.t_star * 60.0).cell(p.predicted_mean).cell(p.predicted_std);
        if (p.mc_accidents) t.cell(p.mc_accidents->mean).cell(p.mc_accidents->sd).cell(p.mc_accidents->se);
        else t.cell(std::string()).cell(std::string()).cell(std::string());
    }
    return t.str();
}

std::string trace_csv(const std::vector<std::pair<double, double>>& trace) {
    CsvTable t({"t_star_min", "objective"});
    for (const auto& [ts, j] : trace) t.row().cell(ts * 60.0).cell(j);
    return t.str();
}

std::string tables_markdown(const SweepResult& sweep) {
    std::vector<double> weights;
    for (const auto& c : sweep.cells) {
        if (std::find(weights.begin(), weights.end(), c.weight) == weights.end()) weights.push_back(c.weight);
    }
    auto fmt = [](const char* f, double x) {
        char b[64];
        std::snprintf(b, sizeof b, f, x);
        return std::string(b);
    };
    auto find = [&](const std::string& rate, double w) -> const Aggregate* {
        for (const auto& c : sweep.cells) {
            if (c.rate == rate && c.weight == w) return &c.controlled;
        }
        return nullptr;
    };
    std::ostringstream o;
    std::string header = "| Scenario |";
    std::string rule = "|---|";
    for (double w : weights) {
        header += " Weight = " + fmt("%.3f", w) + " |";
        rule += "---|";
    }

    o << "## Travel time and objective per vehicle\n\n"
      << "Cells: (mean travel time, objective per vehicle) in minutes, then the change of each versus the "
         "uncontrolled baseline as (controlled - baseline) / baseline.\n\n"
      << header << "\n" << rule << "\n";
    for (std::size_t k = 0; k < sweep.rates.size(); ++k) {
        const auto& base = sweep.baselines[k];
        o << "| " << sweep.rates[k] << " accident rate |";
        for (double w : weights) {
            const Aggregate* a = find(sweep.rates[k], w);
            if (!a) {
                o << " - |";
                continue;
            }
            o << " (" << fmt("%.2f", a->travel_time.mean) << ", " << fmt("%.2f", a->objective.mean) << ")<br>("
              << fmt("%+.1f%%", pct_change(a->travel_time.mean, base.travel_time.mean)) << ", "
              << fmt("%+.1f%%", pct_change(a->objective.mean, base.objective.mean)) << ") |";
        }
        o << "\n";
    }
    o << "\nUncontrolled baselines:";
    for (std::size_t k = 0; k < sweep.rates.size(); ++k) {
        o << " " << sweep.rates[k] << " travel time " << fmt("%.2f", sweep.baselines[k].travel_time.mean) << " min"
          << " (SE " << fmt("%.3f", sweep.baselines[k].travel_time.se) << ")" << (k + 1 < sweep.rates.size() ? ";" : ".");
    }
    o << "\n\n## Accidents\n\n"
      << "Cells: mean accidents per run, change versus the uncontrolled baseline.\n\n"
      << header << "\n" << rule << "\n";
    for (std::size_t k = 0; k < sweep.rates.size(); ++k) {
        const auto& base = sweep.baselines[k];
        o << "| " << sweep.rates[k] << " accident rate |";
        for (double w : weights) {
            const Aggregate* a = find(sweep.rates[k], w);
            if (!a) {
                o << " - |";
                continue;
            }
            o << " " << fmt("%.2f", a->accidents.mean) << ", "
              << fmt("%+.1f%%", pct_change(a->accidents.mean, base.accidents.mean)) << " |";
        }
        o << "\n";
    }
    o << "\nUncontrolled baselines:";
    for (std::size_t k = 0; k < sweep.rates.size(); ++k) {
        o << " " << sweep.rates[k] << " " << fmt("%.2f", sweep.baselines[k].accidents.mean) << " accidents (SE "
          << fmt("%.3f", sweep.baselines[k].accidents.se) << ")" << (k + 1 < sweep.rates.size() ? ";" : ".");
    }
    o << "\n\nRuns per cell: " << (sweep.baselines.empty() ? 0 : sweep.baselines.front().n_runs) << ".\n";
    return o.str();
}

}  // namespace riskgate
