#pragma once

#include "banditqd/maze.hpp"
#include "banditqd/metrics.hpp"
#include "banditqd/selection.hpp"
#include "banditqd/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace banditqd {

struct RastriginParams {
    bool maximize = false;
};

struct ArmParams {
    std::size_t joints = 12;
    std::vector<double> lengths; // empty: 1/joints each
};

struct MazeParams {
    std::size_t width = 8;
    std::size_t height = 8;
    MetricAssignment assignment;
    PathCount path_count = PathCount::Tiles;
};

using TestbedParams = std::variant<RastriginParams, ArmParams, MazeParams>;

/// Config-file testbed name: "rastrigin6", "arm<joints>" or "maze".
std::string testbed_name(const TestbedParams& params);
/// Unique treatment label, e.g. "maze8x8/P:H,L".
std::string testbed_label(const TestbedParams& params);
Resolution default_resolution(const TestbedParams& params);

struct RunConfig {
    TestbedParams testbed = RastriginParams{};
    SelectionPolicy policy = SelectionPolicy::of(PolicyKind::Uniform);
    std::uint64_t seed = 1;
    std::uint64_t budget = 100'000;
    std::uint64_t init_population = 100;
    std::optional<Resolution> resolution; // testbed default when unset
    std::vector<std::uint64_t> checkpoints; // default schedule when empty
    std::string run_id;                    // seed when empty
};

/// 1-2-5 steps per decade from 100 up to `budget`, always ending at `budget`.
std::vector<std::uint64_t> default_checkpoints(std::uint64_t budget);
std::vector<std::uint64_t> resolved_checkpoints(const RunConfig& config);
Resolution resolved_resolution(const RunConfig& config);
std::string resolved_run_id(const RunConfig& config);

/// Throws ConfigError describing the first problem found.
void validate(const RunConfig& config);

struct CellChange {
    std::uint32_t cell = 0;
    double value = 0.0;
};

struct RunRecord {
    RunConfig config;
    std::string run_id;
    std::string method; // policy config name
    std::string testbed; // treatment label
    Resolution resolution;
    std::vector<MetricVector> checkpoints;
    /// Normalized-fitness cells that changed since the previous checkpoint.
    std::vector<std::vector<CellChange>> normalized_changes;
    std::vector<double> final_fitness;          // raw, NaN where empty
    std::vector<std::uint64_t> final_selections; // n_c per cell
    std::uint64_t total_selections = 0;
    double normalization_constant = 1.0;
    std::string rng_algorithm;
    double duration_seconds = 0.0;
    std::string error; // non-empty when the run faulted

    bool ok() const { return error.empty(); }
};

/// Executes one seeded run. Throws EvaluationFault / ConfigError on faults.
RunRecord run(const RunConfig& config);

/// Runs every config with at most `parallelism` in flight (0 = hardware
/// concurrency). Output order follows input order; faults are captured in
/// RunRecord::error and the batch continues.
std::vector<RunRecord> run_experiment(std::span<const RunConfig> configs, std::size_t parallelism);

/// Fills global_reliability and precision of every checkpoint, using
/// per-cell best normalized fitness pooled over all successful records that
/// share a treatment label.
void finalize_reliability(std::span<RunRecord> records);

/// Normalized grid of `record` as of checkpoint `index` (NaN where empty).
std::vector<double> normalized_grid_at(const RunRecord& record, std::size_t index);

} // namespace banditqd
