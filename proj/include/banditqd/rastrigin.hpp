#pragma once

#include "banditqd/rng.hpp"
#include "banditqd/types.hpp"

#include <array>
#include <span>
#include <string>

namespace banditqd {

inline constexpr double kRastriginBound = 5.12;
inline constexpr double kRastriginStep = 0.256; // 5% of the gene range

using RastriginGenome = std::array<double, 6>;

/// 10*n + sum(x_i^2 - 10 cos(2 pi x_i)); 60 + ... for the 6-gene genome.
double rastrigin_fitness(std::span<const double> x);

/// Genes x_1 and x_2.
BehaviorDescriptor rastrigin_descriptor(const RastriginGenome& g);

/// Uniform offset in [-0.256, 0.256] on every gene, truncated to the bounds.
RastriginGenome rastrigin_mutate(const RastriginGenome& parent, Rng& rng);

RastriginGenome rastrigin_random(Rng& rng);

/// Largest fitness over the genome box, found by a 10^6-point 1-D sweep of
/// the separable term. Computed once and cached.
double rastrigin_max_fitness();

class RastriginTestbed {
public:
    using Genome = RastriginGenome;

    explicit RastriginTestbed(bool maximize = false) : maximize_(maximize) {}

    std::string label() const { return "rastrigin6"; }
    Direction direction() const { return maximize_ ? Direction::Maximize : Direction::Minimize; }
    std::array<Bounds, 2> behavior_bounds() const
    {
        return {Bounds{-kRastriginBound, kRastriginBound}, Bounds{-kRastriginBound, kRastriginBound}};
    }
    Resolution default_resolution() const { return {100, 100}; }

    Genome random(Rng& rng) const { return rastrigin_random(rng); }
    Genome mutate(const Genome& g, Rng& rng) const { return rastrigin_mutate(g, rng); }
    Evaluation evaluate(const Genome& g) const { return {rastrigin_fitness(g), rastrigin_descriptor(g)}; }

    /// Maps raw fitness onto [0, 1] with 1 at the best attainable value.
    double normalize(double fitness) const
    {
        const double fmax = rastrigin_max_fitness();
        return maximize_ ? fitness / fmax : 1.0 - fitness / fmax;
    }
    double normalization_constant() const { return rastrigin_max_fitness(); }

private:
    bool maximize_;
};

} // namespace banditqd
