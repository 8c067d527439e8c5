#include "banditqd/metrics.hpp"

#include <numeric>
#include <string>

namespace banditqd {

std::string_view metric_name(MetricId id)
{
    switch (id) {
    case MetricId::GlobalPerformance: return "global_performance";
    case MetricId::GlobalReliability: return "global_reliability";
    case MetricId::Precision: return "precision";
    case MetricId::Coverage: return "coverage";
    case MetricId::QdScore: return "qd_score";
    case MetricId::SelectionEntropy: return "selection_entropy";
    }
    return "";
}

std::string_view metric_label(MetricId id)
{
    switch (id) {
    case MetricId::GlobalPerformance: return "Glob. Perf.";
    case MetricId::GlobalReliability: return "Glob. Rel.";
    case MetricId::Precision: return "Precision";
    case MetricId::Coverage: return "Coverage";
    case MetricId::QdScore: return "QD-score";
    case MetricId::SelectionEntropy: return "Sel. Entropy";
    }
    return "";
}

double metric_value(const MetricVector& v, MetricId id)
{
    switch (id) {
    case MetricId::GlobalPerformance: return v.global_performance;
    case MetricId::GlobalReliability: return v.global_reliability;
    case MetricId::Precision: return v.precision;
    case MetricId::Coverage: return v.coverage;
    case MetricId::QdScore: return v.qd_score;
    case MetricId::SelectionEntropy: return v.selection_entropy;
    }
    return 0.0;
}

double selection_entropy(std::span<const std::uint64_t> selections_per_cell)
{
    const std::uint64_t total = std::accumulate(selections_per_cell.begin(), selections_per_cell.end(), std::uint64_t{0});
    // Undefined without selections or with a single cell; 0 by convention.
    if (total == 0 || selections_per_cell.size() < 2)
        return 0.0;
    const double n = static_cast<double>(total);
    double h = 0.0;
    for (std::uint64_t c : selections_per_cell) {
        if (c == 0)
            continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h / std::log(static_cast<double>(selections_per_cell.size()));
}

std::pair<double, double> reliability_pair(std::span<const double> run_normalized, std::span<const double> best_known)
{
    if (run_normalized.size() != best_known.size())
        throw AnalysisFault("reliability: grid sizes differ");
    double reliability_sum = 0.0;
    double precision_sum = 0.0;
    std::size_t defined = 0;
    std::size_t occupied = 0;
    for (std::size_t i = 0; i < run_normalized.size(); ++i) {
        const double value = run_normalized[i];
        const double best = best_known[i];
        const bool filled = !std::isnan(value);
        if (std::isnan(best)) {
            if (filled)
                throw AnalysisFault("reliability: no best-known value for occupied cell " + std::to_string(i));
            continue;
        }
        ++defined;
        if (!filled)
            continue;
        // A best-known value of 0 can only be matched, never exceeded.
        const double ratio = best > 0.0 ? value / best : 1.0;
        reliability_sum += ratio;
        precision_sum += ratio;
        ++occupied;
    }
    const double reliability = defined ? reliability_sum / static_cast<double>(defined) : 0.0;
    const double precision = occupied ? precision_sum / static_cast<double>(occupied) : 0.0;
    return {reliability, precision};
}

} // namespace banditqd
