#include "banditqd/runner.hpp"

#include "banditqd/arm.hpp"
#include "banditqd/rastrigin.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>

namespace banditqd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool same_value(double a, double b)
{
    if (std::isnan(a) || std::isnan(b))
        return std::isnan(a) && std::isnan(b);
    return a == b;
}

template <class Testbed>
void evolve(const Testbed& testbed, const RunConfig& config, RunRecord& record)
{
    using Genome = typename Testbed::Genome;

    Rng rng(config.seed);
    FeatureMap<Genome> map(testbed.behavior_bounds(), record.resolution, testbed.direction());
    const auto normalize = [&testbed](double f) { return testbed.normalize(f); };
    const auto schedule = resolved_checkpoints(config);
    std::size_t next_checkpoint = 0;
    std::vector<double> previous(map.cell_count(), std::numeric_limits<double>::quiet_NaN());

    const auto snapshot = [&] {
        while (next_checkpoint < schedule.size() && map.evaluations() == schedule[next_checkpoint]) {
            MetricVector m;
            m.global_performance = global_performance(map, normalize);
            m.coverage = coverage(map);
            m.qd_score = qd_score(map, normalize);
            m.selection_entropy = selection_entropy(map);
            m.evaluations = map.evaluations();
            record.checkpoints.push_back(m);

            auto& changes = record.normalized_changes.emplace_back();
            for (std::size_t i : map.occupied()) {
                const double value = normalize(map.slot(i).elite->fitness);
                if (!same_value(value, previous[i])) {
                    changes.push_back({static_cast<std::uint32_t>(i), value});
                    previous[i] = value;
                }
            }
            std::sort(changes.begin(), changes.end(), [](const CellChange& a, const CellChange& b) { return a.cell < b.cell; });
            ++next_checkpoint;
        }
    };

    for (std::uint64_t i = 0; i < config.init_population && map.evaluations() < config.budget; ++i) {
        Genome g = testbed.random(rng);
        const Evaluation e = testbed.evaluate(g);
        map.try_insert(std::move(g), e.fitness, e.descriptor);
        snapshot();
    }

    while (map.evaluations() < config.budget) {
        const Cell parent_cell = select_parent(map, config.policy, rng);
        const ParentTicket ticket = map.record_selection(parent_cell);
        Genome child = testbed.mutate(map.elite(parent_cell).genome, rng);
        const Evaluation e = testbed.evaluate(child);
        const InsertOutcome outcome = map.try_insert(std::move(child), e.fitness, e.descriptor);
        map.record_outcome(ticket, outcome);
        snapshot();
    }

    record.final_fitness.assign(map.cell_count(), std::numeric_limits<double>::quiet_NaN());
    record.final_selections.assign(map.cell_count(), 0);
    for (std::size_t i = 0; i < map.cell_count(); ++i) {
        const auto& s = map.slot(i);
        if (s.elite)
            record.final_fitness[i] = s.elite->fitness;
        record.final_selections[i] = s.stats.selections;
    }
    record.total_selections = map.total_selections();
    record.normalization_constant = testbed.normalization_constant();
}

} // namespace

std::string testbed_name(const TestbedParams& params)
{
    return std::visit(Overloaded{
                          [](const RastriginParams&) { return std::string("rastrigin6"); },
                          [](const ArmParams& p) { return "arm" + std::to_string(p.joints); },
                          [](const MazeParams&) { return std::string("maze"); },
                      },
                      params);
}

std::string testbed_label(const TestbedParams& params)
{
    return std::visit(Overloaded{
                          [](const RastriginParams& p) { return std::string(p.maximize ? "rastrigin6-max" : "rastrigin6"); },
                          [](const ArmParams& p) { return "arm" + std::to_string(p.joints); },
                          [](const MazeParams& p) {
                              return "maze" + std::to_string(p.width) + "x" + std::to_string(p.height) + "/"
                                     + to_string(p.assignment);
                          },
                      },
                      params);
}

Resolution default_resolution(const TestbedParams& params)
{
    return std::holds_alternative<MazeParams>(params) ? Resolution{50, 50} : Resolution{100, 100};
}

std::vector<std::uint64_t> default_checkpoints(std::uint64_t budget)
{
    std::vector<std::uint64_t> out;
    for (std::uint64_t decade = 100; decade <= budget; decade *= 10) {
        for (std::uint64_t step : {1, 2, 5}) {
            if (decade * step <= budget)
                out.push_back(decade * step);
        }
        if (decade > budget / 10)
            break;
    }
    if (out.empty() || out.back() != budget)
        out.push_back(budget);
    return out;
}

std::vector<std::uint64_t> resolved_checkpoints(const RunConfig& config)
{
    return config.checkpoints.empty() ? default_checkpoints(config.budget) : config.checkpoints;
}

Resolution resolved_resolution(const RunConfig& config)
{
    return config.resolution.value_or(default_resolution(config.testbed));
}

std::string resolved_run_id(const RunConfig& config)
{
    return config.run_id.empty() ? std::to_string(config.seed) : config.run_id;
}

void validate(const RunConfig& config)
{
    if (config.init_population < 1)
        throw ConfigError("init_population: must be at least 1");
    if (config.budget < 1)
        throw ConfigError("budget: must be at least 1");
    const Resolution res = resolved_resolution(config);
    if (res.rows < 1 || res.cols < 1)
        throw ConfigError("resolution: must be at least 1x1");
    if (!(config.policy.lambda >= 0.0) || !std::isfinite(config.policy.lambda))
        throw ConfigError("lambda: must be a finite value >= 0");
    const auto schedule = resolved_checkpoints(config);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i] > config.budget)
            throw ConfigError("checkpoints: " + std::to_string(schedule[i]) + " exceeds budget");
        if (schedule[i] == 0)
            throw ConfigError("checkpoints: must be positive");
        if (i > 0 && schedule[i] <= schedule[i - 1])
            throw ConfigError("checkpoints: must be strictly increasing");
    }
    if (const auto* maze = std::get_if<MazeParams>(&config.testbed)) {
        if (maze->width < 2 || maze->height < 2)
            throw ConfigError("testbed.width/height: maze lattice must be at least 2x2");
        if (!is_valid(maze->assignment))
            throw ConfigError("testbed.fitness_metric/behavior_metrics: need three distinct metrics");
    }
    if (const auto* arm = std::get_if<ArmParams>(&config.testbed)) {
        if (arm->joints < 2)
            throw ConfigError("testbed.joints: need at least 2 joints");
        if (!arm->lengths.empty() && arm->lengths.size() != arm->joints)
            throw ConfigError("testbed.lengths: expected one length per joint");
    }
}

RunRecord run(const RunConfig& config)
{
    validate(config);
    const auto started = std::chrono::steady_clock::now();

    RunRecord record;
    record.config = config;
    record.run_id = resolved_run_id(config);
    record.method = std::string(policy_name(config.policy.kind));
    record.testbed = testbed_label(config.testbed);
    record.resolution = resolved_resolution(config);
    record.rng_algorithm = std::string(Rng::algorithm);

    std::visit(Overloaded{
                   [&](const RastriginParams& p) { evolve(RastriginTestbed(p.maximize), config, record); },
                   [&](const ArmParams& p) { evolve(ArmTestbed(p.joints, p.lengths), config, record); },
                   [&](const MazeParams& p) {
                       evolve(MazeTestbed(p.width, p.height, p.assignment, p.path_count), config, record);
                   },
               },
               config.testbed);

    record.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return record;
}

std::vector<RunRecord> run_experiment(std::span<const RunConfig> configs, std::size_t parallelism)
{
    std::vector<RunRecord> records(configs.size());
    if (parallelism == 0)
        parallelism = std::max(1u, std::thread::hardware_concurrency());
    parallelism = std::min(parallelism, std::max<std::size_t>(configs.size(), 1));

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            try {
                records[i] = run(configs[i]);
            } catch (const std::exception& e) {
                RunRecord failed;
                failed.config = configs[i];
                failed.run_id = resolved_run_id(configs[i]);
                failed.method = std::string(policy_name(configs[i].policy.kind));
                failed.testbed = testbed_label(configs[i].testbed);
                failed.error = e.what();
                records[i] = std::move(failed);
            }
        }
    };

    if (parallelism <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < parallelism; ++t)
            pool.emplace_back(worker);
    }
    return records;
}

std::vector<double> normalized_grid_at(const RunRecord& record, std::size_t index)
{
    std::vector<double> grid(record.resolution.cells(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k <= index && k < record.normalized_changes.size(); ++k) {
        for (const auto& change : record.normalized_changes[k])
            grid[change.cell] = change.value;
    }
    return grid;
}

void finalize_reliability(std::span<RunRecord> records)
{
    std::map<std::string, std::vector<RunRecord*>> groups;
    for (auto& r : records) {
        if (r.ok())
            groups[r.testbed].push_back(&r);
    }

    for (auto& [label, members] : groups) {
        const Resolution res = members.front()->resolution;
        std::vector<double> best(res.cells(), std::numeric_limits<double>::quiet_NaN());
        for (const RunRecord* r : members) {
            if (!(r->resolution == res))
                throw AnalysisFault("records of treatment " + label + " use different map resolutions");
            for (const auto& changes : r->normalized_changes) {
                for (const auto& c : changes) {
                    if (std::isnan(best[c.cell]) || c.value > best[c.cell])
                        best[c.cell] = c.value;
                }
            }
        }
        for (RunRecord* r : members) {
            std::vector<double> grid(res.cells(), std::numeric_limits<double>::quiet_NaN());
            for (std::size_t k = 0; k < r->checkpoints.size(); ++k) {
                for (const auto& c : r->normalized_changes[k])
                    grid[c.cell] = c.value;
                const auto [reliability, precision] = reliability_pair(grid, best);
                r->checkpoints[k].global_reliability = reliability;
                r->checkpoints[k].precision = precision;
            }
        }
    }
}

} // namespace banditqd
