#include "banditqd/selection.hpp"

#include <string>

namespace banditqd {

namespace {

struct PolicyNames {
    PolicyKind kind;
    std::string_view name;
    std::string_view label;
};

constexpr std::array<PolicyNames, 9> kNames = {{
    {PolicyKind::UcbIndividual, "ucb_individual", "U_i"},
    {PolicyKind::UcbCell, "ucb_cell", "U_c"},
    {PolicyKind::ExploitIndividual, "exploit_individual", "E_i"},
    {PolicyKind::ExploitCell, "exploit_cell", "E_c"},
    {PolicyKind::ExploreIndividual, "explore_individual", "X_i"},
    {PolicyKind::ExploreCell, "explore_cell", "X_c"},
    {PolicyKind::Greedy, "greedy", "G"},
    {PolicyKind::Uniform, "uniform", "R"},
    {PolicyKind::Curiosity, "curiosity", "C"},
}};

const PolicyNames& lookup(PolicyKind kind)
{
    for (const auto& entry : kNames) {
        if (entry.kind == kind)
            return entry;
    }
    throw ContractViolation("unknown policy kind");
}

} // namespace

SelectionPolicy SelectionPolicy::of(PolicyKind kind)
{
    const bool ucb = kind == PolicyKind::UcbIndividual || kind == PolicyKind::UcbCell;
    return {kind, ucb ? kDefaultUcbLambda : 0.0};
}

std::string_view policy_name(PolicyKind kind) { return lookup(kind).name; }

std::string_view policy_label(PolicyKind kind) { return lookup(kind).label; }

std::optional<PolicyKind> parse_policy(std::string_view name)
{
    for (const auto& entry : kNames) {
        if (entry.name == name || entry.label == name)
            return entry.kind;
    }
    return std::nullopt;
}

bool uses_cell_statistics(PolicyKind kind)
{
    return kind == PolicyKind::UcbCell || kind == PolicyKind::ExploitCell || kind == PolicyKind::ExploreCell;
}

Score ucb_score(std::uint64_t w, std::uint64_t n, std::uint64_t total_selections, double lambda)
{
    if (w > n)
        throw ContractViolation("ucb_score: survivals exceed selections");
    if (n == 0)
        return Score::infinity();
    if (total_selections < n)
        throw ContractViolation("ucb_score: total selections below individual selections");
    const double nd = static_cast<double>(n);
    const double exploit = static_cast<double>(w) / nd;
    if (lambda == 0.0)
        return {exploit, false};
    return {exploit + lambda * std::sqrt(std::log(static_cast<double>(total_selections)) / nd), false};
}

Score exploration_score(std::uint64_t n)
{
    if (n == 0)
        return Score::infinity();
    return {1.0 / static_cast<double>(n), false};
}

Score counter_score(const SelectionPolicy& policy, StatKey key, double log_total)
{
    switch (policy.kind) {
    case PolicyKind::ExploreIndividual:
    case PolicyKind::ExploreCell:
        return exploration_score(key.n);
    case PolicyKind::UcbIndividual:
    case PolicyKind::UcbCell:
    case PolicyKind::ExploitIndividual:
    case PolicyKind::ExploitCell: {
        if (key.n == 0)
            return Score::infinity();
        const double nd = static_cast<double>(key.n);
        const double exploit = static_cast<double>(key.w) / nd;
        if (policy.lambda == 0.0)
            return {exploit, false};
        return {exploit + policy.lambda * std::sqrt(log_total / nd), false};
    }
    default:
        throw ContractViolation("counter_score called for a policy without counter ranking: "
                                + std::string(policy_name(policy.kind)));
    }
}

} // namespace banditqd
