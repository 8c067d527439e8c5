#pragma once

#include "banditqd/rng.hpp"
#include "banditqd/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace banditqd {

/// Connectivity bits of a maze tile ID (0..15).
enum MazeSide : std::uint8_t {
    kNorth = 1,
    kEast = 2,
    kSouth = 4,
    kWest = 8,
};

/// Perfect-maze genome: a row-major lattice of 4-bit tile IDs, row 0 at the top.
class MazeGrid {
public:
    MazeGrid() = default;
    MazeGrid(std::size_t width, std::size_t height) : width_(width), height_(height), tiles_(width * height, 0) {}

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t tile_count() const { return tiles_.size(); }

    std::uint8_t tile(std::size_t row, std::size_t col) const { return tiles_[row * width_ + col]; }
    std::span<const std::uint8_t> tiles() const { return tiles_; }

    /// Raw write; does not touch neighbors.
    void set_tile(std::size_t row, std::size_t col, std::uint8_t id) { tiles_[row * width_ + col] = id; }

    bool is_open(std::size_t row, std::size_t col, MazeSide side) const { return (tile(row, col) & side) != 0; }

    /// Opens the passage on `side` and the reciprocal bit of the neighbor.
    void connect(std::size_t row, std::size_t col, MazeSide side);
    void disconnect(std::size_t row, std::size_t col, MazeSide side);
    /// Walls the tile in on every side, clearing the neighbors' facing bits.
    void isolate(std::size_t row, std::size_t col);

    /// Number of open passages (each counted once).
    std::size_t edge_count() const;

    bool operator==(const MazeGrid&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::uint8_t> tiles_;
};

bool has_reciprocity(const MazeGrid& m);
std::size_t component_count(const MazeGrid& m);
/// Reciprocal, connected, and exactly T - 1 passages.
bool is_perfect(const MazeGrid& m);

MazeGrid maze_generate(std::size_t width, std::size_t height, Rng& rng);

/// Destroys each tile with probability `p`, or one random tile if none was hit.
/// Returns the number of destroyed tiles.
std::size_t maze_destroy_tiles(MazeGrid& m, Rng& rng, double p = 0.02);

MazeGrid maze_repair(MazeGrid broken, Rng& rng);

MazeGrid maze_mutate(const MazeGrid& parent, Rng& rng);

MazeGrid mirror_y(const MazeGrid& m);
MazeGrid mirror_x(const MazeGrid& m);

enum class MazeMetricId { H, B, L, I, P };

inline constexpr std::array<MazeMetricId, 5> kAllMazeMetrics = {MazeMetricId::H, MazeMetricId::B, MazeMetricId::L,
                                                                  MazeMetricId::I, MazeMetricId::P};

char metric_letter(MazeMetricId id);
std::optional<MazeMetricId> parse_metric(std::string_view letter);

/// Whether path length counts tiles (both endpoints included) or moves.
enum class PathCount { Tiles, Moves };

/// Tiles on the unique path from the top-left to the bottom-right tile.
std::size_t shortest_path_tiles(const MazeGrid& m);

double maze_metric(const MazeGrid& m, MazeMetricId id, PathCount path_count = PathCount::Tiles);

struct MetricAssignment {
    MazeMetricId fitness = MazeMetricId::P;
    std::array<MazeMetricId, 2> behavior = {MazeMetricId::H, MazeMetricId::L};

    bool operator==(const MetricAssignment&) const = default;
};

bool is_valid(const MetricAssignment& a);
/// The 30 unordered (fitness, {behavior, behavior}) assignments.
std::vector<MetricAssignment> all_metric_assignments();
std::string to_string(const MetricAssignment& a); // "P:H,L"

BehaviorDescriptor maze_descriptor(const MazeGrid& m, const MetricAssignment& a,
                                   PathCount path_count = PathCount::Tiles);
double maze_fitness(const MazeGrid& m, const MetricAssignment& a, PathCount path_count = PathCount::Tiles);

/// "width height" header, then `height` lines of `width` tile IDs.
void write_maze(std::ostream& out, const MazeGrid& m);
MazeGrid read_maze(std::istream& in);

class MazeTestbed {
public:
    using Genome = MazeGrid;

    MazeTestbed(std::size_t width, std::size_t height, MetricAssignment assignment,
                PathCount path_count = PathCount::Tiles);

    std::string label() const;
    Direction direction() const { return Direction::Maximize; }
    std::array<Bounds, 2> behavior_bounds() const { return {Bounds{0.0, 1.0}, Bounds{0.0, 1.0}}; }
    Resolution default_resolution() const { return {50, 50}; }

    Genome random(Rng& rng) const { return maze_generate(width_, height_, rng); }
    Genome mutate(const Genome& g, Rng& rng) const { return maze_mutate(g, rng); }
    Evaluation evaluate(const Genome& g) const;

    double normalize(double fitness) const { return fitness; }
    double normalization_constant() const { return 1.0; }

private:
    std::size_t width_;
    std::size_t height_;
    MetricAssignment assignment_;
    PathCount path_count_;
};

} // namespace banditqd
