#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace banditqd {

/// Raised when a documented precondition is broken by the caller.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised when a testbed produces a non-finite fitness.
class EvaluationFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for malformed run or experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when run records cannot be combined into a consistent analysis.
class AnalysisFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Direction { Maximize, Minimize };

/// True when `candidate` is strictly better than `incumbent`.
inline bool strictly_better(Direction dir, double candidate, double incumbent)
{
    return dir == Direction::Maximize ? candidate > incumbent : candidate < incumbent;
}

struct Bounds {
    double lo = 0.0;
    double hi = 1.0;
};

struct Resolution {
    std::size_t rows = 100;
    std::size_t cols = 100;

    std::size_t cells() const { return rows * cols; }
    bool operator==(const Resolution&) const = default;
};

struct BehaviorDescriptor {
    double b1 = 0.0;
    double b2 = 0.0;
};

struct Cell {
    std::size_t row = 0;
    std::size_t col = 0;

    bool operator==(const Cell&) const = default;
};

/// Fitness plus descriptor for one evaluated genome.
struct Evaluation {
    double fitness = 0.0;
    BehaviorDescriptor descriptor;
};

} // namespace banditqd
