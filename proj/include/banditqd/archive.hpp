#pragma once

#include "banditqd/archive_index.hpp"
#include "banditqd/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace banditqd {

enum class InsertOutcome { NewCell, Replaced, Discarded };

inline bool survived(InsertOutcome outcome) { return outcome != InsertOutcome::Discarded; }

/// Per-occupant bandit counters. Reset whenever a new individual takes the cell.
struct EliteStats {
    std::uint64_t selections = 0; // n_i
    std::uint64_t survivals = 0;  // w_i
    // Curiosity moves in steps of +1 and -0.5, stored in half units to stay exact.
    std::int64_t curiosity_halves = 0;

    double curiosity() const { return 0.5 * static_cast<double>(curiosity_halves); }
};

/// Per-cell counters accumulated over every occupant the cell ever had.
struct CellStats {
    std::uint64_t selections = 0; // n_c
    std::uint64_t survivals = 0;  // w_c
};

template <class Genome>
struct Elite {
    Genome genome;
    double fitness = 0.0;
    BehaviorDescriptor descriptor;
    EliteStats stats;
    std::uint64_t id = 0; // unique within one map
};

template <class Genome>
struct Slot {
    std::optional<Elite<Genome>> elite;
    CellStats stats;
};

/// Identifies the parent captured at selection time, so survival credit goes
/// to that individual even if its own offspring replaced it meanwhile.
struct ParentTicket {
    Cell cell;
    std::uint64_t elite_id = 0;
};

/// Bin a coordinate into [0, n); values are clamped and hi maps to n - 1.
inline std::size_t bin_coordinate(double v, Bounds b, std::size_t n)
{
    if (std::isnan(v))
        throw ContractViolation("descriptor coordinate is NaN");
    v = std::clamp(v, b.lo, b.hi);
    const double scaled = (v - b.lo) / (b.hi - b.lo) * static_cast<double>(n);
    return std::min(static_cast<std::size_t>(std::floor(scaled)), n - 1);
}

/// Two-dimensional MAP-Elites archive with the bookkeeping needed by every
/// selection policy.
///
/// Besides the grid itself the map keeps incremental indices over occupied
/// cells: individual counters (w_i, n_i), cell counters (w_c, n_c), fitness,
/// and curiosity weights. They are updated by the three mutating operations
/// and let selection run in time proportional to the number of distinct
/// counter values rather than the number of cells.
template <class Genome>
class FeatureMap {
public:
    using Fitness = BucketIndex<double>;

    FeatureMap(std::array<Bounds, 2> bounds, Resolution resolution, Direction direction)
        : bounds_(bounds),
          resolution_(resolution),
          direction_(direction),
          slots_(resolution.cells()),
          individual_(resolution.cells()),
          cellwise_(resolution.cells()),
          fitness_(resolution.cells()),
          curiosity_(resolution.cells()),
          occupied_pos_(resolution.cells(), npos)
    {
        if (resolution.rows == 0 || resolution.cols == 0)
            throw ContractViolation("feature map resolution must be at least 1 per dimension");
        for (const auto& b : bounds) {
            if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi))
                throw ContractViolation("feature map bounds must be finite with lo < hi");
        }
    }

    const std::array<Bounds, 2>& bounds() const { return bounds_; }
    Resolution resolution() const { return resolution_; }
    Direction direction() const { return direction_; }
    std::size_t cell_count() const { return slots_.size(); }
    std::size_t occupied_count() const { return occupied_.size(); }
    std::uint64_t total_selections() const { return total_selections_; }
    std::uint64_t evaluations() const { return evaluations_; }

    Cell map_to_cell(const BehaviorDescriptor& d) const
    {
        return {bin_coordinate(d.b1, bounds_[0], resolution_.rows),
                bin_coordinate(d.b2, bounds_[1], resolution_.cols)};
    }

    std::size_t flat(Cell c) const { return c.row * resolution_.cols + c.col; }
    Cell cell_of(std::size_t flat_index) const
    {
        return {flat_index / resolution_.cols, flat_index % resolution_.cols};
    }

    const Slot<Genome>& slot(Cell c) const { return slots_.at(flat(c)); }
    const Slot<Genome>& slot(std::size_t flat_index) const { return slots_.at(flat_index); }
    std::span<const Slot<Genome>> slots() const { return slots_; }

    const Elite<Genome>& elite(Cell c) const
    {
        const auto& s = slot(c);
        if (!s.elite)
            throw ContractViolation("cell (" + std::to_string(c.row) + ", " + std::to_string(c.col) + ") is empty");
        return *s.elite;
    }

    /// Flat indices of occupied cells, in deterministic but unspecified order.
    std::span<const std::size_t> occupied() const { return occupied_; }

    InsertOutcome try_insert(Genome genome, double fitness, const BehaviorDescriptor& d)
    {
        if (!std::isfinite(fitness))
            throw EvaluationFault("non-finite fitness " + std::to_string(fitness));
        if (!std::isfinite(d.b1) || !std::isfinite(d.b2))
            throw EvaluationFault("non-finite behavior descriptor");
        ++evaluations_;

        const std::size_t at = flat(map_to_cell(d));
        auto& s = slots_[at];
        InsertOutcome outcome = InsertOutcome::NewCell;
        if (s.elite) {
            if (!strictly_better(direction_, fitness, s.elite->fitness))
                return InsertOutcome::Discarded;
            outcome = InsertOutcome::Replaced;
            fitness_.erase(at);
        } else {
            occupied_pos_[at] = occupied_.size();
            occupied_.push_back(at);
            cellwise_.insert(at, StatKey{s.stats.selections, s.stats.survivals});
        }
        s.elite = Elite<Genome>{std::move(genome), fitness, d, EliteStats{}, next_id_++};
        individual_.update(at, StatKey{});
        fitness_.insert(at, fitness);
        curiosity_.set(at, 0);
        return outcome;
    }

    ParentTicket record_selection(Cell c)
    {
        const std::size_t at = flat(c);
        auto& s = slots_.at(at);
        if (!s.elite)
            throw ContractViolation("record_selection on empty cell");
        ++s.elite->stats.selections;
        ++s.stats.selections;
        ++total_selections_;
        individual_.update(at, key(s.elite->stats));
        cellwise_.update(at, key(s.stats));
        return {c, s.elite->id};
    }

    void record_outcome(const ParentTicket& parent, InsertOutcome outcome)
    {
        const std::size_t at = flat(parent.cell);
        auto& s = slots_.at(at);
        const bool ok = survived(outcome);
        if (ok) {
            ++s.stats.survivals;
            cellwise_.update(at, key(s.stats));
        }
        // When the parent was displaced by its own offspring its individual
        // counters left the map with it.
        if (!s.elite || s.elite->id != parent.elite_id)
            return;
        auto& stats = s.elite->stats;
        if (ok) {
            ++stats.survivals;
            stats.curiosity_halves += 2;
        } else {
            stats.curiosity_halves -= 1;
        }
        individual_.update(at, key(stats));
        curiosity_.set(at, static_cast<std::uint64_t>(std::max<std::int64_t>(stats.curiosity_halves, 0)));
    }

    const BucketIndex<StatKey>& individual_index() const { return individual_; }
    const BucketIndex<StatKey>& cell_index() const { return cellwise_; }
    const Fitness& fitness_index() const { return fitness_; }
    /// Roulette weights in half units of curiosity, clipped at zero.
    const WeightTree& curiosity_weights() const { return curiosity_; }

    /// Recomputes every index from the grid and compares. Test support.
    bool indices_consistent() const
    {
        std::uint64_t sum_nc = 0;
        std::size_t occupied = 0;
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            const auto& s = slots_[i];
            sum_nc += s.stats.selections;
            if (!s.elite) {
                if (individual_.contains(i) || cellwise_.contains(i) || fitness_.contains(i) || curiosity_.weight(i) != 0)
                    return false;
                continue;
            }
            ++occupied;
            if (!individual_.contains(i) || individual_.key_of(i) != key(s.elite->stats))
                return false;
            if (!cellwise_.contains(i) || cellwise_.key_of(i) != key(s.stats))
                return false;
            if (!fitness_.contains(i) || fitness_.key_of(i) != s.elite->fitness)
                return false;
            if (curiosity_.weight(i) != static_cast<std::uint64_t>(std::max<std::int64_t>(s.elite->stats.curiosity_halves, 0)))
                return false;
            if (occupied_pos_[i] >= occupied_.size() || occupied_[occupied_pos_[i]] != i)
                return false;
        }
        return sum_nc == total_selections_ && occupied == occupied_.size();
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    static StatKey key(const EliteStats& s) { return {s.selections, s.survivals}; }
    static StatKey key(const CellStats& s) { return {s.selections, s.survivals}; }

    std::array<Bounds, 2> bounds_;
    Resolution resolution_;
    Direction direction_;
    std::vector<Slot<Genome>> slots_;

    BucketIndex<StatKey> individual_;
    BucketIndex<StatKey> cellwise_;
    Fitness fitness_;
    WeightTree curiosity_;
    std::vector<std::size_t> occupied_;
    std::vector<std::size_t> occupied_pos_;

    std::uint64_t total_selections_ = 0;
    std::uint64_t evaluations_ = 0;
    std::uint64_t next_id_ = 1;
};

} // namespace banditqd
