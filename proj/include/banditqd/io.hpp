#pragma once

#include "banditqd/analysis.hpp"
#include "banditqd/runner.hpp"

#include <iosfwd>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

namespace banditqd {

/// Shortest round-trip decimal; "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double v);
double parse_double(std::string_view text);

// -- metrics CSV ------------------------------------------------------------
// run_id,method,testbed,evaluations,global_performance,global_reliability,
// precision,coverage,qd_score,selection_entropy

std::vector<MetricRow> metric_rows(const RunRecord& record);
void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows);
std::vector<MetricRow> read_metrics_csv(std::istream& in);

// -- grid CSV ---------------------------------------------------------------
// `rows` lines of `cols` comma-separated values, row-major.

void write_grid_csv(std::ostream& out, std::span<const double> values, Resolution res);
void write_grid_csv(std::ostream& out, std::span<const std::uint64_t> values, Resolution res);

struct GridCsv {
    Resolution resolution;
    std::vector<double> values;
};
GridCsv read_grid_csv(std::istream& in);

// -- analysis outputs -------------------------------------------------------

/// Header "metric,U_i,U_c,..." then one row per performance metric.
void write_significance_csv(std::ostream& out, const SignificanceTable& table);
void write_progress_csv(std::ostream& out, std::span<const ProgressPoint> points);

// -- experiment configuration -------------------------------------------------

struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<TestbedParams> testbeds;
    std::vector<SelectionPolicy> methods;
    std::size_t runs = 1;
    std::uint64_t seed = 1;
    std::uint64_t budget = 100'000;
    std::uint64_t init_population = 100;
    std::optional<Resolution> resolution;
    std::vector<std::uint64_t> checkpoints;
    SignificanceOptions analysis;
    bool grids = false;
    std::size_t jobs = 0;
};

/// Parses and validates an experiment description. ConfigError messages
/// start with the offending key, e.g. "methods[2]: unknown policy 'foo'".
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

/// One RunConfig per (testbed, method, run); seeds are `seed + position`.
std::vector<RunConfig> expand(const ExperimentConfig& config);

nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const TestbedParams& params);
TestbedParams testbed_from_json(const nlohmann::json& j, const std::string& where);

// -- hashing ----------------------------------------------------------------

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

} // namespace banditqd
