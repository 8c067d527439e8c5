#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <vector>

namespace banditqd {

/// Bandit counters used as a grouping key: (selections, survivals).
struct StatKey {
    std::uint64_t n = 0;
    std::uint64_t w = 0;

    auto operator<=>(const StatKey&) const = default;
};

/// Partitions a fixed universe of item ids into buckets by key.
///
/// Selection policies only need the set of distinct keys and a uniform draw
/// inside the winning buckets, so scoring costs O(#keys) instead of O(#items).
/// Bucket order is deterministic given the same sequence of operations.
template <class Key, class Compare = std::less<Key>>
class BucketIndex {
public:
    using Buckets = std::map<Key, std::vector<std::size_t>, Compare>;

    explicit BucketIndex(std::size_t capacity) : key_(capacity), pos_(capacity, npos) {}

    bool contains(std::size_t item) const { return pos_[item] != npos; }

    const Key& key_of(std::size_t item) const { return key_[item]; }

    void insert(std::size_t item, const Key& key)
    {
        auto& bucket = buckets_[key];
        key_[item] = key;
        pos_[item] = bucket.size();
        bucket.push_back(item);
        ++size_;
    }

    void erase(std::size_t item)
    {
        auto it = buckets_.find(key_[item]);
        auto& bucket = it->second;
        const std::size_t at = pos_[item];
        const std::size_t last = bucket.back();
        bucket[at] = last;
        pos_[last] = at;
        bucket.pop_back();
        pos_[item] = npos;
        if (bucket.empty())
            buckets_.erase(it);
        --size_;
    }

    void update(std::size_t item, const Key& key)
    {
        if (contains(item)) {
            if (!Compare{}(key_[item], key) && !Compare{}(key, key_[item]))
                return;
            erase(item);
        }
        insert(item, key);
    }

    const Buckets& buckets() const { return buckets_; }
    std::size_t size() const { return size_; }

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    Buckets buckets_;
    std::vector<Key> key_;
    std::vector<std::size_t> pos_;
    std::size_t size_ = 0;
};

/// Fenwick tree of non-negative integer weights for roulette draws.
class WeightTree {
public:
    explicit WeightTree(std::size_t n) : tree_(n + 1, 0), weights_(n, 0) {}

    void set(std::size_t i, std::uint64_t weight)
    {
        const auto delta = static_cast<std::int64_t>(weight) - static_cast<std::int64_t>(weights_[i]);
        if (delta == 0)
            return;
        weights_[i] = weight;
        total_ = static_cast<std::uint64_t>(static_cast<std::int64_t>(total_) + delta);
        for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1))
            tree_[k] += delta;
    }

    std::uint64_t weight(std::size_t i) const { return weights_[i]; }
    std::uint64_t total() const { return total_; }

    /// Item whose cumulative weight interval contains `target` (< total()).
    std::size_t find(std::uint64_t target) const
    {
        std::size_t pos = 0;
        std::size_t step = 1;
        while (step * 2 < tree_.size())
            step *= 2;
        auto remaining = static_cast<std::int64_t>(target);
        for (; step > 0; step /= 2) {
            const std::size_t next = pos + step;
            if (next < tree_.size() && tree_[next] <= remaining) {
                pos = next;
                remaining -= tree_[next];
            }
        }
        return pos;
    }

private:
    std::vector<std::int64_t> tree_;
    std::vector<std::uint64_t> weights_;
    std::uint64_t total_ = 0;
};

} // namespace banditqd
