#include "banditqd/selection.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numbers>

using namespace banditqd;
using Catch::Matchers::WithinAbs;

namespace {

const std::array<Bounds, 2> kUnitBox = {Bounds{0.0, 1.0}, Bounds{0.0, 1.0}};

bool contains(const std::vector<std::size_t>& v, std::size_t x)
{
    return std::find(v.begin(), v.end(), x) != v.end();
}

constexpr std::array<PolicyKind, 7> kRanked = {
    PolicyKind::UcbIndividual,     PolicyKind::UcbCell,     PolicyKind::ExploitIndividual, PolicyKind::ExploitCell,
    PolicyKind::ExploreIndividual, PolicyKind::ExploreCell, PolicyKind::Greedy,
};

} // namespace

TEST_CASE("ucb_score fixtures")
{
    const double lambda = 1.0 / std::numbers::sqrt2;
    CHECK(ucb_score(0, 0, 10, lambda).infinite);
    CHECK(ucb_score(1, 1, 1, lambda) == Score{1.0, false});
    // Reference value evaluated at 30 digits.
    CHECK_THAT(ucb_score(3, 5, 100, lambda).value, WithinAbs(1.27861404244151117978830901429, 1e-12));
    CHECK_THROWS_AS(ucb_score(4, 3, 10, lambda), ContractViolation);
}

TEST_CASE("exploration_score fixtures")
{
    CHECK(exploration_score(0).infinite);
    CHECK(exploration_score(1).value == 1.0);
    CHECK(exploration_score(4).value == 0.25);
}

TEST_CASE("Score ordering treats infinity as the top element")
{
    CHECK(Score::infinity() > Score{1e300, false});
    CHECK(Score::infinity() == Score::infinity());
    CHECK(Score{0.5, false} < Score{0.6, false});
}

TEST_CASE("policy names round-trip")
{
    for (PolicyKind k : kAllPolicies) {
        CHECK(parse_policy(policy_name(k)) == k);
        CHECK(parse_policy(policy_label(k)) == k);
    }
    CHECK_FALSE(parse_policy("best").has_value());
    CHECK(policy_label(PolicyKind::UcbCell) == "U_c");
    CHECK(policy_name(PolicyKind::Uniform) == "uniform");
}

TEST_CASE("select_parent on an empty map is a contract violation")
{
    FeatureMap<int> map(kUnitBox, {4, 4}, Direction::Maximize);
    Rng rng(1);
    for (PolicyKind k : kAllPolicies)
        CHECK_THROWS_AS(select_parent(map, SelectionPolicy::of(k), rng), ContractViolation);
}

TEST_CASE("never-selected elites have absolute priority")
{
    FeatureMap<int> map(kUnitBox, {4, 4}, Direction::Maximize);
    map.try_insert(1, 0.1, {0.1, 0.1});
    map.try_insert(2, 0.2, {0.9, 0.9});
    const Cell seen = map.map_to_cell({0.1, 0.1});
    const Cell fresh = map.map_to_cell({0.9, 0.9});
    map.record_outcome(map.record_selection(seen), InsertOutcome::NewCell);
    Rng rng(5);
    for (PolicyKind k : {PolicyKind::UcbIndividual, PolicyKind::ExploitIndividual, PolicyKind::ExploreIndividual}) {
        for (int i = 0; i < 1000; ++i)
            REQUIRE(select_parent(map, SelectionPolicy::of(k), rng) == fresh);
    }
}

TEST_CASE("ranked policies choose from the brute-force argmax set")
{
    Rng states(11);
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const auto direction = trial % 2 ? Direction::Maximize : Direction::Minimize;
        const auto map = testsupport::random_archive(states, 50, direction);
        for (PolicyKind k : kRanked) {
            const auto policy = SelectionPolicy::of(k);
            const auto argmax = testsupport::brute_force_argmax(map, policy);
            for (int draw = 0; draw < 5; ++draw)
                REQUIRE(contains(argmax, map.flat(select_parent(map, policy, rng))));
        }
    }
}

TEST_CASE("ties are broken uniformly")
{
    FeatureMap<int> map(kUnitBox, {5, 5}, Direction::Maximize);
    for (int i = 0; i < 5; ++i)
        map.try_insert(i, 1.0, {0.1 + 0.2 * i, 0.5});
    for (PolicyKind k : kAllPolicies) {
        Rng rng(21);
        std::vector<double> counts(map.cell_count(), 0.0);
        for (int i = 0; i < 10000; ++i)
            ++counts[map.flat(select_parent(map, SelectionPolicy::of(k), rng))];
        INFO(policy_name(k));
        CHECK(testsupport::chi_square_p(counts, testsupport::sampling_distribution(map, PolicyKind::Uniform)) > 0.01);
    }
}

TEST_CASE("Uniform and Curiosity follow their defining distributions")
{
    for (PolicyKind k : {PolicyKind::Uniform, PolicyKind::Curiosity}) {
        Rng states(31);
        Rng rng(32);
        testsupport::PooledChiSquare pooled;
        for (int trial = 0; trial < 50; ++trial) {
            const auto map = testsupport::random_archive(states);
            std::vector<double> counts(map.cell_count(), 0.0);
            for (int i = 0; i < 10000; ++i) {
                const std::size_t at = map.flat(select_parent(map, SelectionPolicy::of(k), rng));
                REQUIRE(map.slot(at).elite.has_value());
                ++counts[at];
            }
            const auto p = testsupport::sampling_distribution(map, k);
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (p[i] == 0.0)
                    REQUIRE(counts[i] == 0.0);
            }
            pooled.add(counts, p);
        }
        INFO(policy_name(k));
        CHECK(pooled.p() > 0.01);
    }
}

TEST_CASE("Curiosity roulette weights")
{
    FeatureMap<int> map(kUnitBox, {4, 4}, Direction::Maximize);
    const BehaviorDescriptor da{0.1, 0.1}, db{0.6, 0.1}, dc{0.1, 0.6};
    map.try_insert(1, 0.5, da);
    map.try_insert(2, 0.5, db);
    map.try_insert(3, 0.5, dc);
    const Cell a = map.map_to_cell(da), b = map.map_to_cell(db), c = map.map_to_cell(dc);

    SECTION("all non-positive falls back to uniform")
    {
        map.record_outcome(map.record_selection(a), InsertOutcome::Discarded);
        Rng rng(2);
        std::vector<double> counts(map.cell_count(), 0.0);
        for (int i = 0; i < 9000; ++i)
            ++counts[map.flat(select_parent(map, SelectionPolicy::of(PolicyKind::Curiosity), rng))];
        CHECK(testsupport::chi_square_p(counts, testsupport::sampling_distribution(map, PolicyKind::Uniform)) > 0.01);
    }
    SECTION("proportional to clipped scores")
    {
        // a: 1 - 0.5 = 0.5, b: 1 + 1 = 2, c: -0.5 -> 0
        map.record_outcome(map.record_selection(a), InsertOutcome::NewCell);
        map.record_outcome(map.record_selection(a), InsertOutcome::Discarded);
        map.record_outcome(map.record_selection(b), InsertOutcome::NewCell);
        map.record_outcome(map.record_selection(b), InsertOutcome::NewCell);
        map.record_outcome(map.record_selection(c), InsertOutcome::Discarded);
        Rng rng(4);
        std::vector<double> counts(map.cell_count(), 0.0);
        for (int i = 0; i < 10000; ++i)
            ++counts[map.flat(select_parent(map, SelectionPolicy::of(PolicyKind::Curiosity), rng))];
        CHECK(counts[map.flat(c)] == 0.0);
        std::vector<double> p(map.cell_count(), 0.0);
        p[map.flat(a)] = 0.2;
        p[map.flat(b)] = 0.8;
        CHECK(testsupport::chi_square_p(counts, p) > 0.01);
    }
}

TEST_CASE("UCB with lambda zero behaves exactly like exploitation")
{
    Rng states(41);
    for (int trial = 0; trial < 200; ++trial) {
        const auto map = testsupport::random_archive(states);
        for (auto [u, e] : {std::pair{PolicyKind::UcbIndividual, PolicyKind::ExploitIndividual},
                            std::pair{PolicyKind::UcbCell, PolicyKind::ExploitCell}}) {
            Rng r1(trial), r2(trial);
            const SelectionPolicy ucb{u, 0.0};
            for (int i = 0; i < 10; ++i)
                REQUIRE(select_parent(map, ucb, r1) == select_parent(map, SelectionPolicy::of(e), r2));
        }
    }
}

TEST_CASE("explore_cell is uniform when every cell has equal n_c")
{
    FeatureMap<int> map(kUnitBox, {5, 5}, Direction::Maximize);
    Rng fill(3);
    while (map.occupied_count() < 12)
        map.try_insert(0, fill.uniform01(), {fill.uniform01(), fill.uniform01()});
    for (std::size_t at : std::vector<std::size_t>(map.occupied().begin(), map.occupied().end())) {
        for (int k = 0; k < 3; ++k)
            map.record_outcome(map.record_selection(map.cell_of(at)), InsertOutcome::Discarded);
    }
    Rng rng(8);
    std::vector<double> counts(map.cell_count(), 0.0);
    for (int i = 0; i < 12000; ++i)
        ++counts[map.flat(select_parent(map, SelectionPolicy::of(PolicyKind::ExploreCell), rng))];
    CHECK(testsupport::chi_square_p(counts, testsupport::sampling_distribution(map, PolicyKind::Uniform)) > 0.01);
}

TEST_CASE("Greedy choices are invariant under positive fitness scaling")
{
    FeatureMap<int> a(kUnitBox, {6, 6}, Direction::Maximize);
    FeatureMap<int> b(kUnitBox, {6, 6}, Direction::Maximize);
    Rng fill(17);
    for (int i = 0; i < 60; ++i) {
        const BehaviorDescriptor d{fill.uniform01(), fill.uniform01()};
        const double f = std::floor(fill.uniform(0.0, 4.0));
        a.try_insert(i, f, d);
        b.try_insert(i, 3.5 * f, d);
    }
    Rng ra(9), rb(9);
    for (int i = 0; i < 2000; ++i)
        REQUIRE(select_parent(a, SelectionPolicy::of(PolicyKind::Greedy), ra)
                == select_parent(b, SelectionPolicy::of(PolicyKind::Greedy), rb));
}

TEST_CASE("selection is deterministic for a fixed state and seed")
{
    Rng states(51);
    const auto map = testsupport::random_archive(states);
    for (PolicyKind k : kAllPolicies) {
        Rng r1(77), r2(77);
        for (int i = 0; i < 100; ++i)
            REQUIRE(select_parent(map, SelectionPolicy::of(k), r1) == select_parent(map, SelectionPolicy::of(k), r2));
    }
}
