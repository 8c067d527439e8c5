#pragma once

#include "banditqd/rng.hpp"
#include "banditqd/types.hpp"

#include <array>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace banditqd {

inline constexpr std::size_t kDefaultArmJoints = 12;
inline constexpr double kArmStep = 0.1 * std::numbers::pi;

using ArmGenome = std::vector<double>;

/// Wraps an angle into [-pi, pi].
double wrap_angle(double theta);

/// Negated population variance of the joint angles (plain arithmetic mean).
double arm_fitness(std::span<const double> theta);

/// Gripper position from cumulative-angle forward kinematics.
BehaviorDescriptor arm_descriptor(std::span<const double> theta, std::span<const double> lengths);

/// Uniform offset in [-0.1 pi, 0.1 pi] on every joint, wrapped into [-pi, pi].
ArmGenome arm_mutate(const ArmGenome& parent, Rng& rng);

ArmGenome arm_random(std::size_t joints, Rng& rng);

/// Largest population variance attainable with `joints` angles in [-pi, pi],
/// found by seeded random search followed by coordinate refinement.
double arm_max_variance(std::size_t joints);

class ArmTestbed {
public:
    using Genome = ArmGenome;

    explicit ArmTestbed(std::size_t joints = kDefaultArmJoints, std::vector<double> lengths = {});

    std::string label() const { return "arm" + std::to_string(joints_); }
    Direction direction() const { return Direction::Maximize; }
    std::array<Bounds, 2> behavior_bounds() const { return {Bounds{-reach_, reach_}, Bounds{-reach_, reach_}}; }
    Resolution default_resolution() const { return {100, 100}; }

    Genome random(Rng& rng) const { return arm_random(joints_, rng); }
    Genome mutate(const Genome& g, Rng& rng) const { return arm_mutate(g, rng); }
    Evaluation evaluate(const Genome& g) const { return {arm_fitness(g), arm_descriptor(g, lengths_)}; }

    double normalize(double fitness) const { return 1.0 + fitness / max_variance_; }
    double normalization_constant() const { return max_variance_; }

    std::span<const double> lengths() const { return lengths_; }

private:
    std::size_t joints_;
    std::vector<double> lengths_;
    double reach_;
    double max_variance_;
};

} // namespace banditqd
