#include "banditqd/io.hpp"

#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace banditqd;
namespace fs = std::filesystem;

namespace {

struct Result {
    int status = -1;
    std::string out;
};

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("banditqd_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir.parent_path());
    return dir;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Result cli(const std::string& args)
{
    const fs::path log = scratch("log.txt");
    const std::string command = std::string(BANDITQD_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int raw = std::system(command.c_str());
    Result r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(log);
    return r;
}

fs::path write_config(const std::string& name, const std::string& text)
{
    const fs::path path = scratch(name + ".json");
    std::ofstream(path) << text;
    return path;
}

const char* kSmallExperiment = R"({
  "name": "small",
  "testbed": {"name": "rastrigin6"},
  "methods": ["U_i", "greedy", "R"],
  "runs": 3,
  "seed": 5,
  "budget": 3000,
  "init_population": 50,
  "resolution": [20, 20],
  "grids": true
})";

} // namespace

TEST_CASE("run writes the default checkpoint schedule")
{
    const fs::path out = scratch("run");
    const auto r = cli("run --testbed rastrigin6 --policy U_i --seed 3 --budget 100000 --out " + out.string());
    INFO(r.out);
    REQUIRE(r.status == 0);
    std::ifstream in(out / "metrics.csv");
    const auto rows = read_metrics_csv(in);
    std::vector<std::uint64_t> evaluations;
    for (const auto& row : rows)
        evaluations.push_back(row.metrics.evaluations);
    CHECK(evaluations
          == std::vector<std::uint64_t>{100, 200, 500, 1000, 2000, 5000, 10000, 20000, 50000, 100000});
    CHECK(rows.back().method == "ucb_individual");
    CHECK(rows.back().testbed == "rastrigin6");
    CHECK(fs::exists(out / "manifest.json"));
    CHECK_FALSE(fs::exists(out / "grids"));
}

TEST_CASE("run on a maze treatment")
{
    const fs::path out = scratch("maze");
    const auto r = cli("run --testbed maze --maze-size 4x4 --assignment B:I,P --policy C --budget 2000 --out " +
                       out.string());
    INFO(r.out);
    REQUIRE(r.status == 0);
    std::ifstream in(out / "metrics.csv");
    const auto rows = read_metrics_csv(in);
    REQUIRE_FALSE(rows.empty());
    CHECK(rows.back().testbed == "maze4x4/B:I,P");
}

TEST_CASE("configuration errors exit with status 1 and name the key")
{
    const auto bad = write_config("bad", R"({"testbed": {"name": "rastrigin6"}, "methods": ["R", "best"]})");
    const auto r = cli("validate-config " + bad.string());
    CHECK(r.status == 1);
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("methods[1]"));

    const auto good = write_config("good", kSmallExperiment);
    CHECK(cli("validate-config " + good.string()).status == 0);
    CHECK(cli("run --policy nonsense --budget 200").status == 1);
    CHECK(cli("frobnicate").status == 1);
}

TEST_CASE("experiment outputs are hashed and reproducible")
{
    const auto config = write_config("small", kSmallExperiment);
    const fs::path a = scratch("exp_a");
    const fs::path b = scratch("exp_b");
    const auto ra = cli("experiment " + config.string() + " --jobs 3 --out " + a.string());
    INFO(ra.out);
    REQUIRE(ra.status == 0);
    REQUIRE(cli("experiment " + config.string() + " --jobs 1 --out " + b.string()).status == 0);

    const auto manifest_a = nlohmann::json::parse(slurp(a / "manifest.json"));
    const auto manifest_b = nlohmann::json::parse(slurp(b / "manifest.json"));
    CHECK(manifest_a.at("runs").size() == 9);
    CHECK(manifest_a.at("config_sha256") == sha256_hex(manifest_a.at("config").dump()));
    CHECK(manifest_a.at("config").at("jobs") == 3);
    for (const char* file : {"metrics.csv", "significance.csv", "progress.csv", "grids/run_5_fitness.csv",
                             "grids/run_13_selections.csv"}) {
        INFO(file);
        REQUIRE(manifest_a.at("artifacts").contains(file));
        CHECK(manifest_a["artifacts"][file]["sha256"] == sha256_file((a / file).string()));
        CHECK(manifest_a["artifacts"][file]["sha256"] == manifest_b["artifacts"][file]["sha256"]);
    }
    for (const auto& run : manifest_a.at("runs"))
        CHECK_FALSE(run.contains("error"));
}

TEST_CASE("analyze rebuilds the significance table")
{
    const auto config = write_config("small", kSmallExperiment);
    const fs::path dir = scratch("exp_analyze");
    REQUIRE(cli("experiment " + config.string() + " --out " + dir.string()).status == 0);
    const std::string original = slurp(dir / "significance.csv");
    fs::remove(dir / "significance.csv");
    const auto r = cli("analyze " + dir.string());
    INFO(r.out);
    REQUIRE(r.status == 0);
    CHECK(slurp(dir / "significance.csv") == original);
    std::istringstream lines(original);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "metric,U_i,G,R");
    int metric_rows = 0;
    for (std::string line; std::getline(lines, line);)
        ++metric_rows;
    CHECK(metric_rows == 5);
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["artifacts"]["significance.csv"]["sha256"] == sha256_file((dir / "significance.csv").string()));
    CHECK(manifest["artifacts"].contains("grids/run_5_fitness.csv"));

    CHECK(cli("analyze " + (dir / "missing.csv").string()).status != 0);
}

TEST_CASE("export-heatmap prints saved grids")
{
    const auto config = write_config("small", kSmallExperiment);
    const fs::path dir = scratch("exp_heat");
    REQUIRE(cli("experiment " + config.string() + " --out " + dir.string()).status == 0);

    const fs::path sel = scratch("heat_sel.csv");
    REQUIRE(cli("export-heatmap " + dir.string() + " --run 7 --kind selections --out " + sel.string()).status == 0);
    CHECK(slurp(sel) == slurp(dir / "grids/run_7_selections.csv"));
    std::ifstream in(sel);
    const auto grid = read_grid_csv(in);
    CHECK(grid.resolution == Resolution{20, 20});
    double sum = 0.0;
    for (double v : grid.values)
        sum += v;
    CHECK(sum == 3000 - 50);

    const auto fitness = cli("export-heatmap " + dir.string() + " --run 7");
    REQUIRE(fitness.status == 0);
    std::istringstream fin(fitness.out);
    const auto fgrid = read_grid_csv(fin);
    for (double v : fgrid.values)
        CHECK((std::isnan(v) || v >= 0.0)); // raw Rastrigin values

    CHECK(cli("export-heatmap " + dir.string() + " --run 999").status != 0);

    const fs::path bare = scratch("run_bare");
    REQUIRE(cli("run --budget 500 --seed 2 --out " + bare.string()).status == 0);
    CHECK(cli("export-heatmap " + bare.string() + " --run 2").status != 0);
}

TEST_CASE("export-heatmap marks empty cells as nan")
{
    const fs::path dir = scratch("run_sparse");
    REQUIRE(cli("run --budget 150 --init-population 100 --seed 4 --grids --out " + dir.string()).status == 0);
    const auto r = cli("export-heatmap " + dir.string() + " --run 4 --kind fitness");
    REQUIRE(r.status == 0);
    std::istringstream in(r.out);
    const auto grid = read_grid_csv(in);
    REQUIRE(grid.resolution == Resolution{100, 100});
    std::size_t empty = 0;
    for (double v : grid.values)
        empty += std::isnan(v) ? 1 : 0;
    CHECK(empty >= 10000 - 150);
    CHECK(empty < 10000);
}

TEST_CASE("list-testbeds names every testbed and policy")
{
    const auto r = cli("list-testbeds");
    REQUIRE(r.status == 0);
    for (const char* text : {"rastrigin6", "arm12", "maze", "P:H,L", "U_i", "U_c", "E_i", "E_c", "X_i", "X_c",
                             "curiosity", "uniform", "greedy"})
        CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring(text));
}
