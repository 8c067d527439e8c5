#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace banditqd {

/// Seedable per-run random source.
///
/// Wraps std::mt19937_64 and maps its raw output to doubles and bounded
/// integers with fixed arithmetic, so results do not depend on the standard
/// library's distribution implementations.
class Rng {
public:
    static constexpr std::string_view algorithm = "mt19937_64";

    explicit Rng(std::uint64_t seed) : engine_(expand(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform on [0, n). n must be positive.
    std::size_t index(std::size_t n)
    {
        const std::uint64_t bound = n;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold)
                return static_cast<std::size_t>(r % bound);
        }
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Independent child stream; advances this generator by one draw.
    Rng split() { return Rng(engine_()); }

    // Satisfies UniformRandomBitGenerator so std::shuffle et al. work.
    using result_type = std::uint64_t;
    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

private:
    static std::mt19937_64::result_type expand(std::uint64_t seed)
    {
        // splitmix64 finalizer, decorrelates nearby seeds
        seed += 0x9E3779B97F4A7C15ULL;
        seed = (seed ^ (seed >> 30)) * 0xBF58476D1CE4E5B9ULL;
        seed = (seed ^ (seed >> 27)) * 0x94D049BB133111EBULL;
        return seed ^ (seed >> 31);
    }

    std::mt19937_64 engine_;
};

} // namespace banditqd
