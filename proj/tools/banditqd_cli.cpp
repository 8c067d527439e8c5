// banditqd: run MAP-Elites selection experiments and analyse them.
//
// Exit status: 0 success, 1 configuration error, 2 runtime fault.

#include "banditqd/analysis.hpp"
#include "banditqd/io.hpp"
#include "banditqd/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace banditqd;
using nlohmann::json;

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeFault = 2;

struct RuntimeFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path default_out_root()
{
    if (const char* env = std::getenv("BANDITQD_OUT"); env && *env)
        return env;
    return "results";
}

Resolution parse_resolution(const std::string& text)
{
    const auto x = text.find('x');
    try {
        if (x == std::string::npos) {
            const auto n = std::stoull(text);
            return {n, n};
        }
        return {std::stoull(text.substr(0, x)), std::stoull(text.substr(x + 1))};
    } catch (const std::exception&) {
        throw ConfigError("--resolution: expected ROWSxCOLS, got '" + text + "'");
    }
}

TestbedParams parse_testbed(const std::string& name, const std::string& maze_size, const std::string& assignment)
{
    if (name == "rastrigin6")
        return RastriginParams{false};
    if (name == "rastrigin6-max")
        return RastriginParams{true};
    json j = {{"name", name}};
    if (name == "maze") {
        const Resolution size = parse_resolution(maze_size);
        j["width"] = size.rows;
        j["height"] = size.cols;
        if (assignment.size() != 5 || assignment[1] != ':' || assignment[3] != ',')
            throw ConfigError("--assignment: expected the form P:H,L");
        j["fitness_metric"] = assignment.substr(0, 1);
        j["behavior_metrics"] = {assignment.substr(2, 1), assignment.substr(4, 1)};
    }
    return testbed_from_json(j, "--testbed");
}

void write_file(const fs::path& path, const std::string& content)
{
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out)
        throw RuntimeFault("cannot write " + path.string());
}

void print_summary(const RunRecord& r)
{
    if (!r.ok()) {
        std::cout << "run " << r.run_id << ' ' << r.testbed << ' ' << r.method << ": FAULT " << r.error << '\n';
        return;
    }
    const auto& m = r.checkpoints.back();
    std::cout << "run " << r.run_id << ' ' << r.testbed << ' ' << r.method << ": evals=" << m.evaluations
              << " coverage=" << format_double(m.coverage) << " qd=" << format_double(m.qd_score)
              << " perf=" << format_double(m.global_performance) << " entropy=" << format_double(m.selection_entropy)
              << " (" << std::fixed << std::setprecision(2) << r.duration_seconds << "s)" << std::defaultfloat
              << '\n';
}

struct Outputs {
    fs::path dir;
    std::map<std::string, std::string> artifacts; // relative path -> sha256

    void add(const std::string& relative, const std::string& content)
    {
        write_file(dir / relative, content);
        artifacts[relative] = sha256_hex(content);
    }
};

std::string metrics_text(const std::vector<RunRecord>& records)
{
    std::vector<MetricRow> rows;
    for (const auto& r : records) {
        if (r.ok()) {
            auto more = metric_rows(r);
            rows.insert(rows.end(), more.begin(), more.end());
        }
    }
    std::ostringstream out;
    write_metrics_csv(out, rows);
    return out.str();
}

void write_grids(Outputs& outputs, const RunRecord& r)
{
    std::ostringstream fitness;
    write_grid_csv(fitness, std::span<const double>(r.final_fitness), r.resolution);
    outputs.add("grids/run_" + r.run_id + "_fitness.csv", fitness.str());
    std::ostringstream selections;
    write_grid_csv(selections, std::span<const std::uint64_t>(r.final_selections), r.resolution);
    outputs.add("grids/run_" + r.run_id + "_selections.csv", selections.str());
}

/// Writes progress.csv and significance.csv.
void write_analysis(Outputs& outputs, const std::vector<MetricRow>& rows, const SignificanceOptions& options,
                    bool print_table)
{
    const auto progress = progress_summary(rows);
    std::ostringstream p;
    write_progress_csv(p, progress);
    outputs.add("progress.csv", p.str());

    const auto samples = auc_samples(rows);
    const auto table = significance_counts(samples, options);
    std::ostringstream s;
    write_significance_csv(s, table);
    outputs.add("significance.csv", s.str());
    if (print_table) {
        std::cout << "significance counts over " << table.treatments << " treatment(s), alpha="
                  << format_double(options.alpha) << '/' << format_double(options.comparisons) << '\n'
                  << s.str();
    }
}

void write_manifest(const Outputs& outputs, const json& extra)
{
    json manifest = extra;
    manifest["artifacts"] = json::object();
    for (const auto& [path, hash] : outputs.artifacts)
        manifest["artifacts"][path] = {{"sha256", hash}};
    write_file(outputs.dir / "manifest.json", manifest.dump(2) + "\n");
}

json runs_json(const std::vector<RunRecord>& records)
{
    json runs = json::array();
    for (const auto& r : records) {
        const json config = to_json(r.config);
        json entry = {{"run_id", r.run_id},
                      {"testbed", r.testbed},
                      {"method", r.method},
                      {"seed", r.config.seed},
                      {"config", config},
                      {"config_sha256", sha256_hex(config.dump())}};
        if (!r.ok())
            entry["error"] = r.error;
        runs.push_back(std::move(entry));
    }
    return runs;
}

int finish_runs(Outputs& outputs, std::vector<RunRecord>& records, bool grids, const SignificanceOptions* analysis,
                json manifest)
{
    finalize_reliability(records);
    for (const auto& r : records)
        print_summary(r);
    outputs.add("metrics.csv", metrics_text(records));
    if (grids) {
        for (const auto& r : records) {
            if (r.ok())
                write_grids(outputs, r);
        }
    }
    if (analysis) {
        std::istringstream in(metrics_text(records));
        write_analysis(outputs, read_metrics_csv(in), *analysis, true);
    }
    manifest["runs"] = runs_json(records);
    write_manifest(outputs, manifest);
    std::cout << "wrote " << outputs.dir.string() << '\n';

    std::size_t failed = 0;
    for (const auto& r : records)
        failed += r.ok() ? 0 : 1;
    if (failed > 0) {
        std::cerr << failed << " run(s) faulted\n";
        return kRuntimeFault;
    }
    return 0;
}

fs::path resolve_metrics_path(const fs::path& input)
{
    return fs::is_directory(input) ? input / "metrics.csv" : input;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"MAP-Elites with bandit parent selection: runs, experiments and analysis"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Execute a single seeded run");
    std::string testbed = "rastrigin6";
    std::string policy = "uniform";
    std::uint64_t seed = 1;
    std::uint64_t budget = 100'000;
    std::uint64_t init_population = 100;
    std::string resolution;
    std::string maze_size = "8x8";
    std::string assignment = "P:H,L";
    double lambda = -1.0;
    bool grids = false;
    std::string out;
    run_cmd->add_option("--testbed", testbed, "rastrigin6, rastrigin6-max, arm<joints> or maze")->capture_default_str();
    run_cmd->add_option("--policy", policy, "Selection policy name or label")->capture_default_str();
    run_cmd->add_option("--seed", seed)->capture_default_str();
    run_cmd->add_option("--budget", budget, "Evaluations including the initial population")->capture_default_str();
    run_cmd->add_option("--init-population", init_population)->capture_default_str();
    run_cmd->add_option("--resolution", resolution, "Feature map ROWSxCOLS (testbed default when unset)");
    run_cmd->add_option("--maze-size", maze_size, "Maze lattice WxH")->capture_default_str();
    run_cmd->add_option("--assignment", assignment, "Maze metric assignment F:B1,B2")->capture_default_str();
    run_cmd->add_option("--lambda", lambda, "UCB exploration weight");
    run_cmd->add_flag("--grids", grids, "Also write final fitness and selection grids");
    run_cmd->add_option("--out", out, "Output directory");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "Execute every run of an experiment config and analyse it");
    std::string config_path;
    std::size_t runs_override = 0;
    std::size_t jobs = 0;
    bool jobs_given = false;
    exp_cmd->add_option("config", config_path, "Experiment JSON file")->required();
    exp_cmd->add_option("--runs", runs_override, "Override the number of runs per treatment");
    exp_cmd->add_option("--jobs", jobs, "Concurrent runs (0 = all cores)")->each([&](const std::string&) { jobs_given = true; });
    exp_cmd->add_flag("--grids", grids, "Also write final fitness and selection grids");
    exp_cmd->add_option("--out", out, "Output directory");

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Significance counts and progress curves from a metrics CSV");
    std::string analyze_input;
    double alpha = 0.05;
    double comparisons = 8;
    bool one_sided = false;
    analyze_cmd->add_option("input", analyze_input, "Experiment directory or metrics CSV")->required();
    analyze_cmd->add_option("--alpha", alpha)->capture_default_str();
    analyze_cmd->add_option("--comparisons", comparisons, "Bonferroni divisor")->capture_default_str();
    analyze_cmd->add_flag("--one-sided", one_sided);
    analyze_cmd->add_option("--out", out, "Output directory (default: next to the input)");

    // export-heatmap
    auto* heat_cmd = app.add_subcommand("export-heatmap", "Print a saved fitness or selection grid as CSV");
    std::string heat_dir;
    std::string heat_run;
    std::string heat_kind = "fitness";
    std::string heat_out;
    heat_cmd->add_option("dir", heat_dir, "Experiment or run directory")->required();
    heat_cmd->add_option("--run", heat_run, "Run id (the seed unless overridden)")->required();
    heat_cmd->add_option("--kind", heat_kind)->check(CLI::IsMember({"fitness", "selections"}))->capture_default_str();
    heat_cmd->add_option("--out", heat_out, "Write to this file instead of stdout");

    auto* list_cmd = app.add_subcommand("list-testbeds", "List testbeds, maze assignments and policies");

    auto* validate_cmd = app.add_subcommand("validate-config", "Check an experiment config without running it");
    validate_cmd->add_option("config", config_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }

    try {
        if (*run_cmd) {
            RunConfig config;
            config.testbed = parse_testbed(testbed, maze_size, assignment);
            const auto kind = parse_policy(policy);
            if (!kind)
                throw ConfigError("--policy: unknown policy '" + policy + "'");
            config.policy = SelectionPolicy::of(*kind);
            if (lambda >= 0.0)
                config.policy.lambda = lambda;
            config.seed = seed;
            config.budget = budget;
            config.init_population = init_population;
            if (!resolution.empty())
                config.resolution = parse_resolution(resolution);
            validate(config);

            Outputs outputs;
            outputs.dir = out.empty() ? default_out_root() / ("run_" + std::string(policy_name(*kind)) + "_"
                                                              + std::to_string(seed))
                                      : fs::path(out);
            std::vector<RunRecord> records = run_experiment(std::span<const RunConfig>(&config, 1), 1);
            return finish_runs(outputs, records, grids, nullptr, {{"command", "run"}});
        }

        if (*exp_cmd) {
            std::ifstream in(config_path);
            if (!in)
                throw ConfigError("config: cannot open '" + config_path + "'");
            json raw;
            try {
                raw = json::parse(in, nullptr, true, true);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("config: parse error: ") + e.what());
            }
            if (runs_override > 0)
                raw["runs"] = runs_override;
            if (jobs_given)
                raw["jobs"] = jobs;
            if (grids)
                raw["grids"] = true;
            const ExperimentConfig config = parse_experiment_config(raw);
            const auto configs = expand(config);

            Outputs outputs;
            outputs.dir = out.empty() ? default_out_root() / config.name : fs::path(out);
            std::cout << config.name << ": " << configs.size() << " runs (" << config.testbeds.size()
                      << " treatment(s) x " << config.methods.size() << " methods x " << config.runs << ")\n";
            std::vector<RunRecord> records = run_experiment(configs, config.jobs);
            json manifest = {{"command", "experiment"},
                             {"name", config.name},
                             {"config", raw},
                             {"config_sha256", sha256_hex(raw.dump())}};
            return finish_runs(outputs, records, config.grids, &config.analysis, manifest);
        }

        if (*analyze_cmd) {
            if (!(alpha > 0.0 && alpha < 1.0))
                throw ConfigError("--alpha: must lie in (0, 1)");
            if (!(comparisons >= 1.0))
                throw ConfigError("--comparisons: must be at least 1");
            const fs::path metrics = resolve_metrics_path(analyze_input);
            std::ifstream in(metrics);
            if (!in)
                throw RuntimeFault("cannot read " + metrics.string());
            const auto rows = read_metrics_csv(in);

            Outputs outputs;
            outputs.dir = out.empty() ? metrics.parent_path() : fs::path(out);
            if (outputs.dir.empty())
                outputs.dir = ".";
            write_analysis(outputs, rows, {alpha, comparisons, one_sided}, true);

            // Merge into an existing manifest so every artifact stays listed.
            const fs::path manifest_path = outputs.dir / "manifest.json";
            json manifest = {{"command", "analyze"}};
            if (fs::exists(manifest_path)) {
                std::ifstream m(manifest_path);
                manifest = json::parse(m);
                for (const auto& [path, entry] : manifest["artifacts"].items()) {
                    if (!outputs.artifacts.contains(path))
                        outputs.artifacts[path] = entry.at("sha256").get<std::string>();
                }
            } else {
                const std::string local = fs::relative(metrics, outputs.dir).generic_string();
                outputs.artifacts[local] = sha256_file(metrics.string());
            }
            manifest["analysis"] = {{"alpha", alpha}, {"comparisons", comparisons}, {"one_sided", one_sided}};
            write_manifest(outputs, manifest);
            return 0;
        }

        if (*heat_cmd) {
            const fs::path path = fs::path(heat_dir) / "grids" / ("run_" + heat_run + "_" + heat_kind + ".csv");
            std::ifstream in(path);
            if (!in)
                throw RuntimeFault("no " + heat_kind + " grid for run " + heat_run + " under " + heat_dir
                                   + " (was it saved with --grids?)");
            const GridCsv grid = read_grid_csv(in);
            std::ostringstream text;
            write_grid_csv(text, grid.values, grid.resolution);
            if (heat_out.empty())
                std::cout << text.str();
            else
                write_file(heat_out, text.str());
            return 0;
        }

        if (*list_cmd) {
            std::cout << "testbeds:\n"
                      << "  rastrigin6      6-D Rastrigin, minimized; descriptor (x1, x2); 100x100\n"
                      << "  rastrigin6-max  same, maximized\n"
                      << "  arm12           12-joint planar arm, fitness -variance; endpoint descriptor; 100x100\n"
                      << "  maze            tile maze (--maze-size WxH, --assignment F:B1,B2); 50x50\n"
                      << "maze assignments:\n ";
            for (const auto& a : all_metric_assignments())
                std::cout << ' ' << to_string(a);
            std::cout << "\npolicies:\n";
            for (PolicyKind k : kAllPolicies)
                std::cout << "  " << policy_label(k) << "\t" << policy_name(k) << '\n';
            return 0;
        }

        if (*validate_cmd) {
            const ExperimentConfig config = load_experiment_config(config_path);
            std::cout << config_path << ": ok (" << expand(config).size() << " runs)\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeFault;
    }
    return 0;
}
