#include "banditqd/maze.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

namespace banditqd {

namespace {

constexpr std::array<MazeSide, 4> kSides = {kNorth, kEast, kSouth, kWest};

MazeSide opposite(MazeSide side)
{
    switch (side) {
    case kNorth: return kSouth;
    case kEast: return kWest;
    case kSouth: return kNorth;
    default: return kEast;
    }
}

struct Step {
    std::size_t row;
    std::size_t col;
};

/// Neighbor across `side`, if inside the lattice.
std::optional<Step> neighbor(const MazeGrid& m, std::size_t row, std::size_t col, MazeSide side)
{
    switch (side) {
    case kNorth:
        if (row == 0)
            return std::nullopt;
        return Step{row - 1, col};
    case kEast:
        if (col + 1 >= m.width())
            return std::nullopt;
        return Step{row, col + 1};
    case kSouth:
        if (row + 1 >= m.height())
            return std::nullopt;
        return Step{row + 1, col};
    default:
        if (col == 0)
            return std::nullopt;
        return Step{row, col - 1};
    }
}

std::uint8_t swap_east_west(std::uint8_t id)
{
    return static_cast<std::uint8_t>((id & (kNorth | kSouth)) | ((id & kEast) ? kWest : 0) | ((id & kWest) ? kEast : 0));
}

std::uint8_t swap_north_south(std::uint8_t id)
{
    return static_cast<std::uint8_t>((id & (kEast | kWest)) | ((id & kNorth) ? kSouth : 0) | ((id & kSouth) ? kNorth : 0));
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        parent_[std::max(a, b)] = std::min(a, b);
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

DisjointSets components_of(const MazeGrid& m)
{
    DisjointSets sets(m.tile_count());
    for (std::size_t r = 0; r < m.height(); ++r) {
        for (std::size_t c = 0; c < m.width(); ++c) {
            if (c + 1 < m.width() && m.is_open(r, c, kEast))
                sets.unite(r * m.width() + c, r * m.width() + c + 1);
            if (r + 1 < m.height() && m.is_open(r, c, kSouth))
                sets.unite(r * m.width() + c, (r + 1) * m.width() + c);
        }
    }
    return sets;
}

} // namespace

void MazeGrid::connect(std::size_t row, std::size_t col, MazeSide side)
{
    const auto next = neighbor(*this, row, col, side);
    if (!next)
        throw ContractViolation("cannot open a passage through the maze border");
    tiles_[row * width_ + col] |= side;
    tiles_[next->row * width_ + next->col] |= opposite(side);
}

void MazeGrid::disconnect(std::size_t row, std::size_t col, MazeSide side)
{
    tiles_[row * width_ + col] &= static_cast<std::uint8_t>(~side);
    if (const auto next = neighbor(*this, row, col, side))
        tiles_[next->row * width_ + next->col] &= static_cast<std::uint8_t>(~opposite(side));
}

void MazeGrid::isolate(std::size_t row, std::size_t col)
{
    for (MazeSide side : kSides)
        disconnect(row, col, side);
}

std::size_t MazeGrid::edge_count() const
{
    std::size_t edges = 0;
    for (std::size_t r = 0; r < height_; ++r) {
        for (std::size_t c = 0; c < width_; ++c) {
            edges += is_open(r, c, kEast) ? 1 : 0;
            edges += is_open(r, c, kSouth) ? 1 : 0;
        }
    }
    return edges;
}

bool has_reciprocity(const MazeGrid& m)
{
    for (std::size_t r = 0; r < m.height(); ++r) {
        for (std::size_t c = 0; c < m.width(); ++c) {
            if (m.tile(r, c) > 15)
                return false;
            for (MazeSide side : kSides) {
                const auto next = neighbor(m, r, c, side);
                const bool open = m.is_open(r, c, side);
                if (!next) {
                    if (open)
                        return false;
                } else if (open != m.is_open(next->row, next->col, opposite(side))) {
                    return false;
                }
            }
        }
    }
    return true;
}

std::size_t component_count(const MazeGrid& m)
{
    auto sets = components_of(m);
    std::size_t roots = 0;
    for (std::size_t i = 0; i < m.tile_count(); ++i)
        roots += sets.find(i) == i ? 1 : 0;
    return roots;
}

bool is_perfect(const MazeGrid& m)
{
    return m.tile_count() > 0 && has_reciprocity(m) && m.edge_count() + 1 == m.tile_count() && component_count(m) == 1;
}

MazeGrid maze_generate(std::size_t width, std::size_t height, Rng& rng)
{
    if (width < 2 || height < 2)
        throw ContractViolation("maze lattice must be at least 2x2");
    MazeGrid m(width, height);
    std::vector<bool> visited(m.tile_count(), false);
    std::vector<Step> stack;
    const std::size_t start = rng.index(m.tile_count());
    stack.push_back({start / width, start % width});
    visited[start] = true;

    std::vector<MazeSide> open;
    while (!stack.empty()) {
        const Step at = stack.back();
        open.clear();
        for (MazeSide side : kSides) {
            const auto next = neighbor(m, at.row, at.col, side);
            if (next && !visited[next->row * width + next->col])
                open.push_back(side);
        }
        if (open.empty()) {
            stack.pop_back();
            continue;
        }
        const MazeSide side = open[rng.index(open.size())];
        const Step next = *neighbor(m, at.row, at.col, side);
        m.connect(at.row, at.col, side);
        visited[next.row * width + next.col] = true;
        stack.push_back(next);
    }
    return m;
}

std::size_t maze_destroy_tiles(MazeGrid& m, Rng& rng, double p)
{
    std::size_t destroyed = 0;
    for (std::size_t r = 0; r < m.height(); ++r) {
        for (std::size_t c = 0; c < m.width(); ++c) {
            if (rng.bernoulli(p)) {
                m.isolate(r, c);
                ++destroyed;
            }
        }
    }
    if (destroyed == 0) {
        const std::size_t t = rng.index(m.tile_count());
        m.isolate(t / m.width(), t % m.width());
        destroyed = 1;
    }
    return destroyed;
}

MazeGrid maze_repair(MazeGrid m, Rng& rng)
{
    const std::size_t width = m.width();
    const std::size_t count = m.tile_count();

    // Phase 1: grow a random DFS tree through each group of isolated tiles and
    // hook it onto one adjacent tile outside the group.
    constexpr std::size_t kConnected = 0;
    constexpr std::size_t kPending = 1;
    std::vector<std::size_t> state(count, kConnected);
    std::vector<std::size_t> isolated;
    for (std::size_t t = 0; t < count; ++t) {
        if (m.tiles()[t] == 0) {
            state[t] = kPending;
            isolated.push_back(t);
        }
    }
    std::shuffle(isolated.begin(), isolated.end(), rng);

    std::size_t region = kPending;
    std::vector<Step> stack;
    std::vector<std::pair<Step, MazeSide>> anchors;
    std::vector<MazeSide> open;
    for (std::size_t seed : isolated) {
        if (state[seed] != kPending)
            continue;
        ++region;
        anchors.clear();
        // Tiles outside the group keep their state during this walk, so each
        // tile's anchors are collected once, when it joins the region.
        auto enter = [&](Step at) {
            state[at.row * width + at.col] = region;
            for (MazeSide side : kSides) {
                const auto next = neighbor(m, at.row, at.col, side);
                if (!next)
                    continue;
                const std::size_t s = state[next->row * width + next->col];
                if (s != kPending && s != region)
                    anchors.emplace_back(at, side);
            }
            stack.push_back(at);
        };
        enter({seed / width, seed % width});
        while (!stack.empty()) {
            const Step at = stack.back();
            open.clear();
            for (MazeSide side : kSides) {
                const auto next = neighbor(m, at.row, at.col, side);
                if (next && state[next->row * width + next->col] == kPending)
                    open.push_back(side);
            }
            if (open.empty()) {
                stack.pop_back();
                continue;
            }
            const MazeSide side = open[rng.index(open.size())];
            m.connect(at.row, at.col, side);
            enter(*neighbor(m, at.row, at.col, side));
        }
        if (!anchors.empty()) {
            const auto& [from, side] = anchors[rng.index(anchors.size())];
            m.connect(from.row, from.col, side);
        }
    }

    // Phase 2: join islands through random lattice edges between them.
    auto sets = components_of(m);
    std::vector<std::pair<Step, MazeSide>> bridges;
    for (;;) {
        bridges.clear();
        for (std::size_t r = 0; r < m.height(); ++r) {
            for (std::size_t c = 0; c < width; ++c) {
                const std::size_t here = sets.find(r * width + c);
                if (c + 1 < width && here != sets.find(r * width + c + 1))
                    bridges.emplace_back(Step{r, c}, kEast);
                if (r + 1 < m.height() && here != sets.find((r + 1) * width + c))
                    bridges.emplace_back(Step{r, c}, kSouth);
            }
        }
        if (bridges.empty())
            break;
        const auto& [from, side] = bridges[rng.index(bridges.size())];
        const Step to = *neighbor(m, from.row, from.col, side);
        m.connect(from.row, from.col, side);
        sets.unite(from.row * width + from.col, to.row * width + to.col);
    }
    return m;
}

MazeGrid maze_mutate(const MazeGrid& parent, Rng& rng)
{
    MazeGrid child = parent;
    maze_destroy_tiles(child, rng);
    return maze_repair(std::move(child), rng);
}

MazeGrid mirror_y(const MazeGrid& m)
{
    MazeGrid out(m.width(), m.height());
    for (std::size_t r = 0; r < m.height(); ++r)
        for (std::size_t c = 0; c < m.width(); ++c)
            out.set_tile(r, m.width() - 1 - c, swap_east_west(m.tile(r, c)));
    return out;
}

MazeGrid mirror_x(const MazeGrid& m)
{
    MazeGrid out(m.width(), m.height());
    for (std::size_t r = 0; r < m.height(); ++r)
        for (std::size_t c = 0; c < m.width(); ++c)
            out.set_tile(m.height() - 1 - r, c, swap_north_south(m.tile(r, c)));
    return out;
}

char metric_letter(MazeMetricId id)
{
    switch (id) {
    case MazeMetricId::H: return 'H';
    case MazeMetricId::B: return 'B';
    case MazeMetricId::L: return 'L';
    case MazeMetricId::I: return 'I';
    default: return 'P';
    }
}

std::optional<MazeMetricId> parse_metric(std::string_view letter)
{
    for (MazeMetricId id : kAllMazeMetrics) {
        if (letter.size() == 1 && letter[0] == metric_letter(id))
            return id;
    }
    return std::nullopt;
}

std::size_t shortest_path_tiles(const MazeGrid& m)
{
    const std::size_t width = m.width();
    const std::size_t goal = m.tile_count() - 1;
    std::vector<std::size_t> dist(m.tile_count(), 0);
    std::vector<bool> seen(m.tile_count(), false);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = true;
    dist[0] = 1;
    while (!frontier.empty()) {
        const std::size_t t = frontier.front();
        frontier.pop();
        if (t == goal)
            return dist[t];
        for (MazeSide side : kSides) {
            if (!m.is_open(t / width, t % width, side))
                continue;
            const auto next = neighbor(m, t / width, t % width, side);
            if (!next)
                continue;
            const std::size_t n = next->row * width + next->col;
            if (!seen[n]) {
                seen[n] = true;
                dist[n] = dist[t] + 1;
                frontier.push(n);
            }
        }
    }
    throw ContractViolation("maze has no path between its corners");
}

double maze_metric(const MazeGrid& m, MazeMetricId id, PathCount path_count)
{
    const auto total = static_cast<double>(m.tile_count());
    std::size_t hits = 0;
    switch (id) {
    case MazeMetricId::H:
        for (std::size_t r = 0; r < m.height(); ++r)
            for (std::size_t c = 0; c < m.width(); ++c)
                hits += m.tile(r, c) == swap_east_west(m.tile(r, m.width() - 1 - c)) ? 1 : 0;
        return hits / total;
    case MazeMetricId::B:
        for (std::size_t r = 0; r < m.height(); ++r) {
            for (std::size_t c = 0; c < m.width(); ++c) {
                const std::uint8_t id_here = m.tile(r, c);
                const bool y_match = id_here == swap_east_west(m.tile(r, m.width() - 1 - c));
                const bool x_match = id_here == swap_north_south(m.tile(m.height() - 1 - r, c));
                hits += y_match && x_match ? 1 : 0;
            }
        }
        return hits / total;
    case MazeMetricId::L:
        for (std::uint8_t t : m.tiles())
            hits += (t == (kNorth | kEast) || t == (kEast | kSouth) || t == (kSouth | kWest) || t == (kWest | kNorth)) ? 1 : 0;
        return hits / total;
    case MazeMetricId::I:
        for (std::uint8_t t : m.tiles())
            hits += (t == (kNorth | kSouth) || t == (kEast | kWest)) ? 1 : 0;
        return hits / total;
    case MazeMetricId::P: {
        if (component_count(m) != 1)
            throw ContractViolation("path metric requires a connected maze");
        double path = static_cast<double>(shortest_path_tiles(m));
        if (path_count == PathCount::Moves)
            path -= 1.0;
        return 1.0 - std::abs(2.0 * path / total - 1.0);
    }
    }
    return 0.0;
}

bool is_valid(const MetricAssignment& a)
{
    return a.behavior[0] != a.behavior[1] && a.fitness != a.behavior[0] && a.fitness != a.behavior[1];
}

std::vector<MetricAssignment> all_metric_assignments()
{
    std::vector<MetricAssignment> out;
    for (MazeMetricId fitness : kAllMazeMetrics) {
        for (std::size_t i = 0; i < kAllMazeMetrics.size(); ++i) {
            for (std::size_t j = i + 1; j < kAllMazeMetrics.size(); ++j) {
                MetricAssignment a{fitness, {kAllMazeMetrics[i], kAllMazeMetrics[j]}};
                if (is_valid(a))
                    out.push_back(a);
            }
        }
    }
    return out;
}

std::string to_string(const MetricAssignment& a)
{
    return {metric_letter(a.fitness), ':', metric_letter(a.behavior[0]), ',', metric_letter(a.behavior[1])};
}

BehaviorDescriptor maze_descriptor(const MazeGrid& m, const MetricAssignment& a, PathCount path_count)
{
    return {maze_metric(m, a.behavior[0], path_count), maze_metric(m, a.behavior[1], path_count)};
}

double maze_fitness(const MazeGrid& m, const MetricAssignment& a, PathCount path_count)
{
    return maze_metric(m, a.fitness, path_count);
}

void write_maze(std::ostream& out, const MazeGrid& m)
{
    out << m.width() << ' ' << m.height() << '\n';
    for (std::size_t r = 0; r < m.height(); ++r) {
        for (std::size_t c = 0; c < m.width(); ++c)
            out << (c ? " " : "") << static_cast<int>(m.tile(r, c));
        out << '\n';
    }
}

MazeGrid read_maze(std::istream& in)
{
    std::size_t width = 0;
    std::size_t height = 0;
    if (!(in >> width >> height) || width == 0 || height == 0)
        throw std::runtime_error("maze file: bad header");
    MazeGrid m(width, height);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            int id = -1;
            if (!(in >> id) || id < 0 || id > 15)
                throw std::runtime_error("maze file: bad tile at row " + std::to_string(r) + ", col " + std::to_string(c));
            m.set_tile(r, c, static_cast<std::uint8_t>(id));
        }
    }
    return m;
}

MazeTestbed::MazeTestbed(std::size_t width, std::size_t height, MetricAssignment assignment, PathCount path_count)
    : width_(width), height_(height), assignment_(assignment), path_count_(path_count)
{
    if (width < 2 || height < 2)
        throw ContractViolation("maze lattice must be at least 2x2");
    if (!is_valid(assignment))
        throw ContractViolation("maze metric assignment must use three distinct metrics");
}

std::string MazeTestbed::label() const
{
    return "maze" + std::to_string(width_) + "x" + std::to_string(height_) + "/" + to_string(assignment_);
}

Evaluation MazeTestbed::evaluate(const Genome& g) const
{
    return {maze_fitness(g, assignment_, path_count_), maze_descriptor(g, assignment_, path_count_)};
}

} // namespace banditqd
