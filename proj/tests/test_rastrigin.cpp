#include "banditqd/rastrigin.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>

using namespace banditqd;
using Catch::Matchers::WithinAbs;

namespace {

// Largest value of x^2 - 10 cos(2 pi x) on the gene range: Newton on the
// derivative from every half-integer, plus the two endpoints.
double term_max_oracle()
{
    const auto term = [](double x) { return x * x - 10.0 * std::cos(2.0 * std::numbers::pi * x); };
    double best = std::max(term(-5.12), term(5.12));
    for (int k = -6; k <= 5; ++k) {
        double x = k + 0.5;
        for (int it = 0; it < 50; ++it) {
            const double d1 = 2.0 * x + 20.0 * std::numbers::pi * std::sin(2.0 * std::numbers::pi * x);
            const double d2 = 2.0 + 40.0 * std::numbers::pi * std::numbers::pi * std::cos(2.0 * std::numbers::pi * x);
            x -= d1 / d2;
        }
        if (x >= -5.12 && x <= 5.12)
            best = std::max(best, term(x));
    }
    return best;
}

} // namespace

TEST_CASE("rastrigin fitness fixtures")
{
    const std::array<double, 6> zero{};
    CHECK(rastrigin_fitness(zero) == 0.0);
    const std::array<double, 6> half{0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
    CHECK_THAT(rastrigin_fitness(half), WithinAbs(121.5, 1e-9));
    const std::array<double, 6> one{1, 0, 0, 0, 0, 0};
    CHECK_THAT(rastrigin_fitness(one), WithinAbs(1.0, 1e-12));
}

TEST_CASE("rastrigin descriptor is the first two genes")
{
    CHECK(rastrigin_descriptor({0, 0, 3, 3, 3, 3}).b1 == 0.0);
    const auto d = rastrigin_descriptor({-5.12, 5.12, 0, 0, 0, 0});
    CHECK(d.b1 == -5.12);
    CHECK(d.b2 == 5.12);
}

TEST_CASE("rastrigin normalization constant matches an analytic oracle")
{
    const double fmax = 60.0 + 6.0 * term_max_oracle();
    CHECK_THAT(rastrigin_max_fitness(), WithinAbs(fmax, 1e-6));
    const RastriginTestbed tb;
    CHECK(tb.normalize(0.0) == 1.0);
    CHECK_THAT(tb.normalize(fmax), WithinAbs(0.0, 1e-8));
    CHECK(tb.direction() == Direction::Minimize);
    CHECK(RastriginTestbed(true).direction() == Direction::Maximize);
}

TEST_CASE("rastrigin fitness stays within [0, F_max]")
{
    Rng rng(1);
    const double fmax = rastrigin_max_fitness();
    for (int i = 0; i < 100000; ++i) {
        const auto g = rastrigin_random(rng);
        const double f = rastrigin_fitness(g);
        REQUIRE(f >= 0.0);
        REQUIRE(f <= fmax + 1e-9);
    }
}

TEST_CASE("rastrigin mutation")
{
    Rng rng(2);
    SECTION("truncation at the bound")
    {
        const RastriginGenome parent{5.12, 5.12, 5.12, 5.12, 5.12, 5.12};
        for (int i = 0; i < 10000; ++i) {
            const auto child = rastrigin_mutate(parent, rng);
            REQUIRE(child[0] >= 4.864);
            REQUIRE(child[0] <= 5.12);
        }
    }
    SECTION("offsets are uniform on the step interval")
    {
        const RastriginGenome parent{};
        std::vector<double> offsets;
        bool all_changed = true;
        for (int i = 0; i < 100000; ++i) {
            const auto child = rastrigin_mutate(parent, rng);
            offsets.push_back(child[i % 6]);
            for (double x : child)
                all_changed = all_changed && x != 0.0;
        }
        CHECK(all_changed);
        const double p = testsupport::ks_p(offsets, [](double x) { return std::clamp((x + 0.256) / 0.512, 0.0, 1.0); });
        CHECK(p > 0.01);
    }
    SECTION("symmetric about zero")
    {
        const RastriginGenome parent{};
        std::vector<double> mirrored;
        for (int i = 0; i < 50000; ++i)
            mirrored.push_back(-rastrigin_mutate(parent, rng)[3]);
        CHECK(testsupport::ks_p(mirrored, [](double x) { return std::clamp((x + 0.256) / 0.512, 0.0, 1.0); }) > 0.01);
    }
}

TEST_CASE("rastrigin random genomes")
{
    Rng rng(3);
    std::array<double, 6> sum{};
    RastriginGenome previous = rastrigin_random(rng);
    constexpr int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto g = rastrigin_random(rng);
        for (std::size_t k = 0; k < 6; ++k) {
            REQUIRE(g[k] >= -5.12);
            REQUIRE(g[k] <= 5.12);
            sum[k] += g[k];
        }
        REQUIRE(g != previous);
        previous = g;
    }
    const double se = (10.24 / std::sqrt(12.0)) / std::sqrt(double(draws));
    for (double s : sum)
        CHECK(std::abs(s / draws) < 3.0 * se);
}
