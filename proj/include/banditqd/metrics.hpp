#pragma once

#include "banditqd/archive.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace banditqd {

/// Six evaluation measures of one archive state.
struct MetricVector {
    double global_performance = 0.0;
    double global_reliability = std::numeric_limits<double>::quiet_NaN();
    double precision = std::numeric_limits<double>::quiet_NaN();
    double coverage = 0.0;
    double qd_score = 0.0;
    double selection_entropy = 0.0;
    std::uint64_t evaluations = 0;
};

enum class MetricId { GlobalPerformance, GlobalReliability, Precision, Coverage, QdScore, SelectionEntropy };

inline constexpr std::array<MetricId, 6> kAllMetrics = {MetricId::GlobalPerformance, MetricId::GlobalReliability,
                                                        MetricId::Precision,         MetricId::Coverage,
                                                        MetricId::QdScore,           MetricId::SelectionEntropy};

/// The measures compared in significance tables (entropy is descriptive only).
inline constexpr std::array<MetricId, 5> kPerformanceMetrics = {MetricId::GlobalPerformance,
                                                                MetricId::GlobalReliability, MetricId::Precision,
                                                                MetricId::Coverage, MetricId::QdScore};

std::string_view metric_name(MetricId id);  // CSV column name
std::string_view metric_label(MetricId id); // table row label
double metric_value(const MetricVector& v, MetricId id);

double selection_entropy(std::span<const std::uint64_t> selections_per_cell);

/// Reliability over all cells with a defined best-known value, precision
/// over the run's occupied cells. NaN marks empty / undefined cells.
std::pair<double, double> reliability_pair(std::span<const double> run_normalized,
                                           std::span<const double> best_known);

template <class Genome>
double coverage(const FeatureMap<Genome>& map)
{
    return static_cast<double>(map.occupied_count()) / static_cast<double>(map.cell_count());
}

struct Identity {
    double operator()(double x) const { return x; }
};

/// Sum of fitness over occupied cells, after `normalize`.
template <class Genome, class Normalize = Identity>
double qd_score(const FeatureMap<Genome>& map, Normalize normalize = {})
{
    double sum = 0.0;
    for (std::size_t i : map.occupied())
        sum += normalize(map.slot(i).elite->fitness);
    return sum;
}

/// Normalized fitness of the best elite.
template <class Genome, class Normalize = Identity>
double global_performance(const FeatureMap<Genome>& map, Normalize normalize = {})
{
    if (map.occupied_count() == 0)
        throw ContractViolation("global_performance of an empty map");
    const auto& buckets = map.fitness_index().buckets();
    const double best = map.direction() == Direction::Maximize ? buckets.rbegin()->first : buckets.begin()->first;
    return normalize(best);
}

template <class Genome>
double selection_entropy(const FeatureMap<Genome>& map)
{
    std::vector<std::uint64_t> counts;
    counts.reserve(map.cell_count());
    for (const auto& s : map.slots())
        counts.push_back(s.stats.selections);
    return selection_entropy(counts);
}

/// Per-cell normalized fitness, NaN where empty.
template <class Genome, class Normalize = Identity>
std::vector<double> normalized_grid(const FeatureMap<Genome>& map, Normalize normalize = {})
{
    std::vector<double> grid(map.cell_count(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i : map.occupied())
        grid[i] = normalize(map.slot(i).elite->fitness);
    return grid;
}

} // namespace banditqd
