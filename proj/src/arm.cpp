#include "banditqd/arm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>

namespace banditqd {

namespace {

constexpr double kPi = std::numbers::pi;

double population_variance(std::span<const double> theta)
{
    if (std::adjacent_find(theta.begin(), theta.end(), std::not_equal_to<>()) == theta.end())
        return 0.0;
    const double mean = std::accumulate(theta.begin(), theta.end(), 0.0) / static_cast<double>(theta.size());
    double sum = 0.0;
    for (double t : theta)
        sum += (t - mean) * (t - mean);
    return sum / static_cast<double>(theta.size());
}

double search_max_variance(std::size_t joints)
{
    Rng rng(0x5eed'a4a1ULL + joints);
    double best = 0.0;
    std::vector<double> theta(joints);
    for (int start = 0; start < 64; ++start) {
        for (double& t : theta)
            t = rng.uniform(-kPi, kPi);
        double current = population_variance(theta);
        // The variance is convex, so pushing single coordinates to either
        // bound never gets stuck below a vertex optimum.
        for (bool improved = true; improved;) {
            improved = false;
            for (std::size_t i = 0; i < joints; ++i) {
                double keep = theta[i];
                for (double candidate : {-kPi, kPi}) {
                    theta[i] = candidate;
                    const double v = population_variance(theta);
                    if (v > current + 1e-15) {
                        current = v;
                        keep = candidate;
                        improved = true;
                    } else {
                        theta[i] = keep;
                    }
                }
            }
        }
        best = std::max(best, current);
    }
    return best;
}

} // namespace

double wrap_angle(double theta) { return std::remainder(theta, 2.0 * kPi); }

double arm_fitness(std::span<const double> theta) { return -population_variance(theta); }

BehaviorDescriptor arm_descriptor(std::span<const double> theta, std::span<const double> lengths)
{
    if (theta.size() != lengths.size())
        throw ContractViolation("arm_descriptor: joint and length counts differ");
    double angle = 0.0;
    double x = 0.0;
    double y = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        angle += theta[i];
        x += lengths[i] * std::cos(angle);
        y += lengths[i] * std::sin(angle);
    }
    return {x, y};
}

ArmGenome arm_mutate(const ArmGenome& parent, Rng& rng)
{
    ArmGenome child = parent;
    for (double& t : child)
        t = wrap_angle(t + rng.uniform(-kArmStep, kArmStep));
    return child;
}

ArmGenome arm_random(std::size_t joints, Rng& rng)
{
    ArmGenome g(joints);
    for (double& t : g)
        t = rng.uniform(-kPi, kPi);
    return g;
}

double arm_max_variance(std::size_t joints)
{
    static std::mutex mutex;
    static std::map<std::size_t, double> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(joints);
    if (it == cache.end())
        it = cache.emplace(joints, search_max_variance(joints)).first;
    return it->second;
}

ArmTestbed::ArmTestbed(std::size_t joints, std::vector<double> lengths)
    : joints_(joints), lengths_(std::move(lengths))
{
    if (joints_ == 0)
        throw ContractViolation("arm testbed needs at least one joint");
    if (lengths_.empty())
        lengths_.assign(joints_, 1.0 / static_cast<double>(joints_));
    if (lengths_.size() != joints_)
        throw ContractViolation("arm testbed: " + std::to_string(lengths_.size()) + " lengths for "
                                + std::to_string(joints_) + " joints");
    reach_ = std::accumulate(lengths_.begin(), lengths_.end(), 0.0);
    max_variance_ = joints_ > 1 ? arm_max_variance(joints_) : 1.0;
}

} // namespace banditqd
