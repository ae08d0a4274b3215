#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "riskgate/harness.hpp"
#include "riskgate/scenario.hpp"

namespace riskgate {

/// Parses and validates a scenario document. Throws ConfigError with a field path or line number.
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario(const std::filesystem::path& path);

/// Canonical JSON form of a scenario; parse_scenario_text(serialize_scenario(s)) reproduces s.
std::string serialize_scenario(const Scenario& sc);

/// Shortest-round-trip-safe decimal rendering used in every CSV cell.
std::string format_number(double x);

/// Minimal RFC 4180 writer: header row, comma separated, quoted only when needed.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row();
    CsvTable& cell(double x);
    CsvTable& cell(long long x);
    CsvTable& cell(const std::string& s);

    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Plain SVG line chart.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<ChartSeries>& series);

/**
 * Files written into one output directory.
 *
 * Every file goes through write(); commit() adds manifest.json with sizes
 * and FNV-1a checksums. If the bundle is destroyed without commit(), all files
 * it wrote are removed again.
 */
class OutputBundle {
public:
    explicit OutputBundle(std::filesystem::path dir);
    ~OutputBundle();
    OutputBundle(const OutputBundle&) = delete;
    OutputBundle& operator=(const OutputBundle&) = delete;

    void write(const std::string& name, const std::string& content);
    void commit();
    const std::filesystem::path& dir() const { return dir_; }
    const std::vector<std::string>& files() const { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
    bool created_dir_ = false;
    bool committed_ = false;
};

std::uint64_t fnv1a64(const std::string& bytes);

// Table renderers shared by the CLI.
std::string runs_csv(const std::vector<RunResult>& runs);
std::string aggregate_csv(const std::vector<std::pair<std::string, Aggregate>>& rows,
                          const Aggregate* baseline = nullptr);
std::string series_csv(const std::vector<SeriesSample>& series);
std::string accidents_csv(const std::vector<AccidentRecord>& accidents);
std::string flow_comparison_csv(const std::vector<double>& controlled, const std::vector<double>& baseline,
                                double interval_h);
std::string frontier_csv(const std::vector<FrontierPoint>& frontier);
std::string trace_csv(const std::vector<std::pair<double, double>>& trace);

/// Travel-time/objective and accident matrices, controlled vs. uncontrolled.
std::string tables_markdown(const SweepResult& sweep);

}  // namespace riskgate
