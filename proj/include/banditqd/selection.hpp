#pragma once

#include "banditqd/archive.hpp"
#include "banditqd/rng.hpp"

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace banditqd {

enum class PolicyKind {
    UcbIndividual,
    UcbCell,
    ExploitIndividual,
    ExploitCell,
    ExploreIndividual,
    ExploreCell,
    Greedy,
    Uniform,
    Curiosity,
};

inline constexpr std::array<PolicyKind, 9> kAllPolicies = {
    PolicyKind::UcbIndividual,     PolicyKind::UcbCell,     PolicyKind::ExploitIndividual,
    PolicyKind::ExploitCell,       PolicyKind::ExploreIndividual, PolicyKind::ExploreCell,
    PolicyKind::Greedy,            PolicyKind::Uniform,     PolicyKind::Curiosity,
};

inline constexpr double kDefaultUcbLambda = 0.70710678118654752440; // 1/sqrt(2)

struct SelectionPolicy {
    PolicyKind kind = PolicyKind::Uniform;
    double lambda = 0.0; // only read by the UCB/exploit kinds

    static SelectionPolicy of(PolicyKind kind);
};

/// Config-file name, e.g. "ucb_cell".
std::string_view policy_name(PolicyKind kind);
/// Short label used in tables, e.g. "U_c".
std::string_view policy_label(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);

bool uses_cell_statistics(PolicyKind kind);

/// Extended real: finite value or +infinity.
struct Score {
    double value = 0.0;
    bool infinite = false;

    static Score infinity() { return {0.0, true}; }

    bool operator==(const Score& o) const { return infinite == o.infinite && (infinite || value == o.value); }
    std::partial_ordering operator<=>(const Score& o) const
    {
        if (infinite || o.infinite)
            return infinite == o.infinite ? std::partial_ordering::equivalent
                                          : (infinite ? std::partial_ordering::greater : std::partial_ordering::less);
        return value <=> o.value;
    }
};

/// w/n + lambda * sqrt(ln(N_s) / n), or +infinity for n = 0.
Score ucb_score(std::uint64_t w, std::uint64_t n, std::uint64_t total_selections, double lambda);

/// 1/n, or +infinity for n = 0.
Score exploration_score(std::uint64_t n);

/// Score of one (n, w) pair under a counter-ranked policy (U_*, E_*, X_*).
/// `log_total` is ln(N_s), or 0 when N_s = 0.
Score counter_score(const SelectionPolicy& policy, StatKey key, double log_total);

namespace detail {

template <class Buckets, class ScoreFn>
std::size_t pick_best_bucket(const Buckets& buckets, ScoreFn&& score, Rng& rng)
{
    std::vector<const std::vector<std::size_t>*> tied;
    Score best;
    std::size_t total = 0;
    for (const auto& [key, bucket] : buckets) {
        const Score s = score(key);
        if (tied.empty() || s > best) {
            best = s;
            tied.clear();
            total = 0;
        }
        if (s == best) {
            tied.push_back(&bucket);
            total += bucket.size();
        }
    }
    std::size_t r = rng.index(total);
    for (const auto* bucket : tied) {
        if (r < bucket->size())
            return (*bucket)[r];
        r -= bucket->size();
    }
    return tied.back()->back(); // unreachable
}

} // namespace detail

/// Chooses a parent cell under `policy`. Score-ranked policies return an
/// argmax with ties broken uniformly; Uniform and Curiosity sample.
template <class Genome>
Cell select_parent(const FeatureMap<Genome>& map, const SelectionPolicy& policy, Rng& rng)
{
    if (map.occupied_count() == 0)
        throw ContractViolation("select_parent on an empty feature map");

    switch (policy.kind) {
    case PolicyKind::Uniform:
        return map.cell_of(map.occupied()[rng.index(map.occupied_count())]);

    case PolicyKind::Curiosity: {
        const auto& weights = map.curiosity_weights();
        if (weights.total() == 0)
            return map.cell_of(map.occupied()[rng.index(map.occupied_count())]);
        return map.cell_of(weights.find(rng.index(weights.total())));
    }

    case PolicyKind::Greedy: {
        const auto& buckets = map.fitness_index().buckets();
        const auto& best = map.direction() == Direction::Maximize ? buckets.rbegin()->second
                                                                  : buckets.begin()->second;
        return map.cell_of(best[rng.index(best.size())]);
    }

    default: {
        const auto& index = uses_cell_statistics(policy.kind) ? map.cell_index() : map.individual_index();
        const std::uint64_t total = map.total_selections();
        const double log_total = total > 0 ? std::log(static_cast<double>(total)) : 0.0;
        return map.cell_of(detail::pick_best_bucket(
            index.buckets(), [&](const StatKey& k) { return counter_score(policy, k, log_total); }, rng));
    }
    }
}

} // namespace banditqd
