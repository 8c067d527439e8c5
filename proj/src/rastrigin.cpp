#include "banditqd/rastrigin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace banditqd {

namespace {

double rastrigin_term(double x) { return x * x - 10.0 * std::cos(2.0 * std::numbers::pi * x); }

} // namespace

double rastrigin_fitness(std::span<const double> x)
{
    double sum = 10.0 * static_cast<double>(x.size());
    for (double xi : x)
        sum += rastrigin_term(xi);
    return sum;
}

BehaviorDescriptor rastrigin_descriptor(const RastriginGenome& g) { return {g[0], g[1]}; }

RastriginGenome rastrigin_mutate(const RastriginGenome& parent, Rng& rng)
{
    RastriginGenome child = parent;
    for (double& x : child)
        x = std::clamp(x + rng.uniform(-kRastriginStep, kRastriginStep), -kRastriginBound, kRastriginBound);
    return child;
}

RastriginGenome rastrigin_random(Rng& rng)
{
    RastriginGenome g;
    for (double& x : g)
        x = rng.uniform(-kRastriginBound, kRastriginBound);
    return g;
}

double rastrigin_max_fitness()
{
    static const double value = [] {
        constexpr int points = 1'000'000;
        double best = rastrigin_term(-kRastriginBound);
        for (int i = 1; i <= points; ++i) {
            const double x = -kRastriginBound + 2.0 * kRastriginBound * i / points;
            best = std::max(best, rastrigin_term(x));
        }
        return 10.0 * 6 + 6 * best;
    }();
    return value;
}

} // namespace banditqd
