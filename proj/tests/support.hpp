#pragma once

// Statistical oracles shared by the tests. They deliberately avoid the
// library's own statistics code.

#include "banditqd/selection.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testsupport {

/// Pearson chi-square goodness-of-fit p-value for observed counts against
/// expected probabilities.
inline double chi_square_p(const std::vector<double>& observed, const std::vector<double>& probabilities)
{
    double total = 0.0;
    for (double o : observed)
        total += o;
    double stat = 0.0;
    std::size_t bins = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (probabilities[i] <= 0.0)
            continue;
        const double e = total * probabilities[i];
        stat += (observed[i] - e) * (observed[i] - e) / e;
        ++bins;
    }
    if (bins < 2)
        return 1.0;
    boost::math::chi_squared dist(static_cast<double>(bins - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

/// One-sample Kolmogorov-Smirnov p-value (asymptotic Kolmogorov distribution
/// with the Stephens small-sample correction).
inline double ks_p(std::vector<double> sample, const std::function<double(double)>& cdf)
{
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    if (lambda < 0.2)
        return 1.0;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-12)
            break;
    }
    return std::clamp(p, 0.0, 1.0);
}

/// Pools independent chi-square statistics: returns the p-value of the summed
/// statistic against the summed degrees of freedom.
struct PooledChiSquare {
    double statistic = 0.0;
    double dof = 0.0;

    void add(const std::vector<double>& observed, const std::vector<double>& probabilities)
    {
        double total = 0.0;
        for (double o : observed)
            total += o;
        std::size_t bins = 0;
        for (std::size_t i = 0; i < observed.size(); ++i) {
            if (probabilities[i] <= 0.0)
                continue;
            const double e = total * probabilities[i];
            statistic += (observed[i] - e) * (observed[i] - e) / e;
            ++bins;
        }
        if (bins >= 2)
            dof += static_cast<double>(bins - 1);
    }

    double p() const
    {
        if (dof == 0.0)
            return 1.0;
        boost::math::chi_squared dist(dof);
        return boost::math::cdf(boost::math::complement(dist, statistic));
    }
};

/// Random archive state: up to `max_elites` occupants on a 10x10 unit map,
/// small random counters (many ties, some never-selected elites) and a few
/// replaced occupants so individual and cell counters diverge.
inline banditqd::FeatureMap<int> random_archive(banditqd::Rng& rng, std::size_t max_elites = 50,
                                                banditqd::Direction direction = banditqd::Direction::Maximize)
{
    using namespace banditqd;
    FeatureMap<int> map({Bounds{0.0, 1.0}, Bounds{0.0, 1.0}}, {10, 10}, direction);
    const std::size_t elites = 1 + rng.index(max_elites);
    while (map.occupied_count() < elites) {
        const BehaviorDescriptor d{rng.uniform01(), rng.uniform01()};
        map.try_insert(0, std::floor(rng.uniform(0.0, 8.0)), d);
    }
    const std::size_t operations = rng.index(4 * elites + 1);
    for (std::size_t k = 0; k < operations; ++k) {
        const std::size_t at = map.occupied()[rng.index(map.occupied_count())];
        const Cell c = map.cell_of(at);
        const auto ticket = map.record_selection(c);
        InsertOutcome outcome = rng.bernoulli(0.4) ? InsertOutcome::NewCell : InsertOutcome::Discarded;
        if (rng.bernoulli(0.1)) {
            const auto& e = map.elite(c);
            outcome = map.try_insert(1, e.fitness + 1.0, e.descriptor);
        }
        map.record_outcome(ticket, outcome);
    }
    return map;
}

/// Score of one occupied cell computed straight from its counters.
/// Returns +infinity for never-selected statistics.
inline double brute_force_score(const banditqd::FeatureMap<int>& map, std::size_t cell,
                                const banditqd::SelectionPolicy& policy)
{
    using namespace banditqd;
    const auto& slot = map.slot(cell);
    const bool cellwise = uses_cell_statistics(policy.kind);
    const double n = static_cast<double>(cellwise ? slot.stats.selections : slot.elite->stats.selections);
    const double w = static_cast<double>(cellwise ? slot.stats.survivals : slot.elite->stats.survivals);
    const double total = static_cast<double>(map.total_selections());
    switch (policy.kind) {
    case PolicyKind::Greedy:
        return map.direction() == Direction::Maximize ? slot.elite->fitness : -slot.elite->fitness;
    case PolicyKind::ExploreIndividual:
    case PolicyKind::ExploreCell:
        return n == 0 ? INFINITY : 1.0 / n;
    default:
        return n == 0 ? INFINITY : w / n + policy.lambda * std::sqrt(std::log(total) / n);
    }
}

/// Occupied cells whose brute-force score is maximal (within 1e-12).
inline std::vector<std::size_t> brute_force_argmax(const banditqd::FeatureMap<int>& map,
                                                   const banditqd::SelectionPolicy& policy)
{
    double best = -INFINITY;
    for (std::size_t i = 0; i < map.cell_count(); ++i) {
        if (map.slot(i).elite)
            best = std::max(best, brute_force_score(map, i, policy));
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < map.cell_count(); ++i) {
        if (!map.slot(i).elite)
            continue;
        const double s = brute_force_score(map, i, policy);
        if (s == best || (std::isfinite(best) && std::abs(s - best) <= 1e-12))
            out.push_back(i);
    }
    return out;
}

/// Defining distribution of the sampling policies over flat cell indices.
inline std::vector<double> sampling_distribution(const banditqd::FeatureMap<int>& map, banditqd::PolicyKind kind)
{
    std::vector<double> p(map.cell_count(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < map.cell_count(); ++i) {
        if (!map.slot(i).elite)
            continue;
        p[i] = kind == banditqd::PolicyKind::Curiosity ? std::max(map.slot(i).elite->stats.curiosity(), 0.0) : 1.0;
        total += p[i];
    }
    if (total == 0.0) {
        for (std::size_t i = 0; i < map.cell_count(); ++i)
            p[i] = map.slot(i).elite ? 1.0 : 0.0;
        total = static_cast<double>(map.occupied_count());
    }
    for (double& v : p)
        v /= total;
    return p;
}

} // namespace testsupport
