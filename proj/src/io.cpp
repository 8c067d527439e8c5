#include "banditqd/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace banditqd {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep))
        out.push_back(field);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

// RFC 4180 field splitting: quoted fields may hold commas and doubled quotes.
std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                out.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.emplace_back();
        } else {
            out.back() += ch;
        }
    }
    if (quoted)
        throw std::runtime_error("csv: unterminated quoted field");
    return out;
}

std::string csv_field(const std::string& text)
{
    if (text.find_first_of(",\"\n\r") == std::string::npos)
        return text;
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + '"';
}

void strip_cr(std::string& line)
{
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
}

constexpr const char* kMetricsHeader =
    "run_id,method,testbed,evaluations,global_performance,global_reliability,precision,coverage,qd_score,"
    "selection_entropy";

[[noreturn]] void config_error(const std::string& where, const std::string& what)
{
    throw ConfigError(where + ": " + what);
}

void reject_unknown_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            known = known || key == a;
        if (!known)
            config_error(where.empty() ? key : where + "." + key, "unknown key");
    }
}

template <class T>
T get_as(const json& j, const std::string& where)
{
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        config_error(where, "wrong type (" + std::string(j.type_name()) + ")");
    }
}

std::uint64_t get_count(const json& j, const std::string& where)
{
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
        config_error(where, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

MazeMetricId metric_from_json(const json& j, const std::string& where)
{
    const auto text = get_as<std::string>(j, where);
    const auto id = parse_metric(text);
    if (!id)
        config_error(where, "unknown maze metric '" + text + "' (expected one of H, B, L, I, P)");
    return *id;
}

PathCount path_count_from_json(const json& j, const std::string& where)
{
    const auto text = get_as<std::string>(j, where);
    if (text == "tiles")
        return PathCount::Tiles;
    if (text == "moves")
        return PathCount::Moves;
    config_error(where, "expected \"tiles\" or \"moves\"");
}

Resolution resolution_from_json(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2)
        config_error(where, "expected [rows, cols]");
    const Resolution r{get_count(j[0], where + "[0]"), get_count(j[1], where + "[1]")};
    if (r.rows < 1 || r.cols < 1)
        config_error(where, "must be at least 1x1");
    return r;
}

/// Expands one testbed entry, which may be a maze generator, into treatments.
std::vector<TestbedParams> testbeds_from_json(const json& j, const std::string& where)
{
    if (!j.is_object() || !j.contains("name"))
        config_error(where + ".name", "missing testbed name");
    const auto name = get_as<std::string>(j["name"], where + ".name");
    if (name == "maze" && (j.contains("sizes") || j.contains("assignments"))) {
        reject_unknown_keys(j, where, {"name", "sizes", "assignments", "path_count"});
        std::vector<std::pair<std::size_t, std::size_t>> sizes;
        if (j.contains("sizes")) {
            const auto& s = j["sizes"];
            if (!s.is_array() || s.empty())
                config_error(where + ".sizes", "expected a list of [width, height]");
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto r = resolution_from_json(s[i], where + ".sizes[" + std::to_string(i) + "]");
                sizes.emplace_back(r.rows, r.cols);
            }
        } else {
            sizes.emplace_back(8, 8);
        }
        std::vector<MetricAssignment> assignments;
        if (!j.contains("assignments") || j["assignments"] == "all") {
            assignments = all_metric_assignments();
        } else {
            const auto& a = j["assignments"];
            if (!a.is_array())
                config_error(where + ".assignments", "expected \"all\" or a list like \"P:H,L\"");
            for (std::size_t i = 0; i < a.size(); ++i) {
                const std::string at = where + ".assignments[" + std::to_string(i) + "]";
                const auto text = get_as<std::string>(a[i], at);
                if (text.size() != 5 || text[1] != ':' || text[3] != ',')
                    config_error(at, "expected the form \"P:H,L\"");
                MetricAssignment m{metric_from_json(text.substr(0, 1), at), {metric_from_json(text.substr(2, 1), at),
                                                                            metric_from_json(text.substr(4, 1), at)}};
                if (!is_valid(m))
                    config_error(at, "metrics must be distinct");
                assignments.push_back(m);
            }
        }
        const PathCount pc = j.contains("path_count") ? path_count_from_json(j["path_count"], where + ".path_count")
                                                      : PathCount::Tiles;
        std::vector<TestbedParams> out;
        for (const auto& [w, h] : sizes) {
            if (w < 2 || h < 2)
                config_error(where + ".sizes", "maze lattice must be at least 2x2");
            for (const auto& a : assignments)
                out.emplace_back(MazeParams{w, h, a, pc});
        }
        return out;
    }
    return {testbed_from_json(j, where)};
}

} // namespace

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text)
{
    if (text == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf")
        return std::numeric_limits<double>::infinity();
    if (text == "-inf")
        return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::runtime_error("not a number: '" + std::string(text) + "'");
    return v;
}

std::vector<MetricRow> metric_rows(const RunRecord& record)
{
    std::vector<MetricRow> rows;
    for (const auto& m : record.checkpoints)
        rows.push_back({record.run_id, record.method, record.testbed, m});
    return rows;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows)
{
    out << kMetricsHeader << '\n';
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        out << csv_field(r.run_id) << ',' << csv_field(r.method) << ',' << csv_field(r.testbed) << ',' << m.evaluations << ','
            << format_double(m.global_performance) << ',' << format_double(m.global_reliability) << ','
            << format_double(m.precision) << ',' << format_double(m.coverage) << ',' << format_double(m.qd_score)
            << ',' << format_double(m.selection_entropy) << '\n';
    }
}

std::vector<MetricRow> read_metrics_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("metrics csv: empty input");
    strip_cr(line);
    if (line != kMetricsHeader)
        throw std::runtime_error("metrics csv: unexpected header");
    std::vector<MetricRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty())
            continue;
        const auto f = split_csv(line);
        if (f.size() != 10)
            throw std::runtime_error("metrics csv line " + std::to_string(line_no) + ": expected 10 fields");
        MetricRow r;
        r.run_id = f[0];
        r.method = f[1];
        r.testbed = f[2];
        r.metrics.evaluations = std::stoull(f[3]);
        r.metrics.global_performance = parse_double(f[4]);
        r.metrics.global_reliability = parse_double(f[5]);
        r.metrics.precision = parse_double(f[6]);
        r.metrics.coverage = parse_double(f[7]);
        r.metrics.qd_score = parse_double(f[8]);
        r.metrics.selection_entropy = parse_double(f[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_grid_csv(std::ostream& out, std::span<const double> values, Resolution res)
{
    if (values.size() != res.cells())
        throw std::invalid_argument("grid size does not match resolution");
    for (std::size_t r = 0; r < res.rows; ++r) {
        for (std::size_t c = 0; c < res.cols; ++c)
            out << (c ? "," : "") << format_double(values[r * res.cols + c]);
        out << '\n';
    }
}

void write_grid_csv(std::ostream& out, std::span<const std::uint64_t> values, Resolution res)
{
    if (values.size() != res.cells())
        throw std::invalid_argument("grid size does not match resolution");
    for (std::size_t r = 0; r < res.rows; ++r) {
        for (std::size_t c = 0; c < res.cols; ++c)
            out << (c ? "," : "") << values[r * res.cols + c];
        out << '\n';
    }
}

GridCsv read_grid_csv(std::istream& in)
{
    GridCsv grid{{0, 0}, {}};
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty())
            continue;
        const auto fields = split(line, ',');
        if (grid.resolution.rows == 0)
            grid.resolution.cols = fields.size();
        else if (fields.size() != grid.resolution.cols)
            throw std::runtime_error("grid csv: ragged row " + std::to_string(grid.resolution.rows + 1));
        for (const auto& f : fields)
            grid.values.push_back(parse_double(f));
        ++grid.resolution.rows;
    }
    return grid;
}

void write_significance_csv(std::ostream& out, const SignificanceTable& table)
{
    out << "metric";
    for (const auto& m : table.methods) {
        const auto kind = parse_policy(m);
        out << ',' << (kind ? std::string(policy_label(*kind)) : m);
    }
    out << '\n';
    for (std::size_t mi = 0; mi < table.metrics.size(); ++mi) {
        out << metric_name(table.metrics[mi]);
        for (int w : table.wins[mi])
            out << ',' << w;
        out << '\n';
    }
}

void write_progress_csv(std::ostream& out, std::span<const ProgressPoint> points)
{
    out << "testbed,method,metric,evaluations,mean,ci_low,ci_high,runs\n";
    for (const auto& p : points) {
        out << csv_field(p.treatment) << ',' << csv_field(p.method) << ',' << metric_name(p.metric) << ',' << p.evaluations << ','
            << format_double(p.mean) << ',' << format_double(p.mean - p.half_width) << ','
            << format_double(p.mean + p.half_width) << ',' << p.runs << '\n';
    }
}

TestbedParams testbed_from_json(const json& j, const std::string& where)
{
    if (!j.is_object() || !j.contains("name"))
        config_error(where + ".name", "missing testbed name");
    const auto name = get_as<std::string>(j["name"], where + ".name");
    if (name == "rastrigin6") {
        reject_unknown_keys(j, where, {"name", "maximize"});
        RastriginParams p;
        if (j.contains("maximize"))
            p.maximize = get_as<bool>(j["maximize"], where + ".maximize");
        return p;
    }
    if (name.rfind("arm", 0) == 0) {
        reject_unknown_keys(j, where, {"name", "joints", "lengths"});
        ArmParams p;
        if (name.size() > 3) {
            try {
                p.joints = std::stoul(name.substr(3));
            } catch (const std::exception&) {
                config_error(where + ".name", "unknown testbed '" + name + "'");
            }
        }
        if (j.contains("joints"))
            p.joints = get_count(j["joints"], where + ".joints");
        if (p.joints < 2)
            config_error(where + ".joints", "need at least 2 joints");
        if (j.contains("lengths"))
            p.lengths = get_as<std::vector<double>>(j["lengths"], where + ".lengths");
        if (!p.lengths.empty() && p.lengths.size() != p.joints)
            config_error(where + ".lengths", "expected one length per joint");
        return p;
    }
    if (name == "maze") {
        reject_unknown_keys(j, where, {"name", "width", "height", "fitness_metric", "behavior_metrics", "path_count"});
        MazeParams p;
        if (j.contains("width"))
            p.width = get_count(j["width"], where + ".width");
        if (j.contains("height"))
            p.height = get_count(j["height"], where + ".height");
        if (p.width < 2 || p.height < 2)
            config_error(where + ".width", "maze lattice must be at least 2x2");
        if (j.contains("fitness_metric"))
            p.assignment.fitness = metric_from_json(j["fitness_metric"], where + ".fitness_metric");
        if (j.contains("behavior_metrics")) {
            const auto& b = j["behavior_metrics"];
            if (!b.is_array() || b.size() != 2)
                config_error(where + ".behavior_metrics", "expected two metric letters");
            p.assignment.behavior = {metric_from_json(b[0], where + ".behavior_metrics[0]"),
                                     metric_from_json(b[1], where + ".behavior_metrics[1]")};
        }
        if (!is_valid(p.assignment))
            config_error(where + ".behavior_metrics", "fitness and behavior metrics must be distinct");
        if (j.contains("path_count"))
            p.path_count = path_count_from_json(j["path_count"], where + ".path_count");
        return p;
    }
    config_error(where + ".name", "unknown testbed '" + name + "' (expected rastrigin6, arm12 or maze)");
}

ExperimentConfig parse_experiment_config(const json& j)
{
    if (!j.is_object())
        throw ConfigError("config: expected a JSON object");
    reject_unknown_keys(j, "",
                        {"name", "testbed", "testbeds", "methods", "lambda", "runs", "seed", "budget",
                         "init_population", "resolution", "checkpoints", "analysis", "grids", "jobs"});
    ExperimentConfig c;
    if (j.contains("name"))
        c.name = get_as<std::string>(j["name"], "name");

    if (j.contains("testbed") == j.contains("testbeds"))
        config_error("testbed", "give exactly one of 'testbed' or 'testbeds'");
    if (j.contains("testbed")) {
        c.testbeds = testbeds_from_json(j["testbed"], "testbed");
    } else {
        const auto& list = j["testbeds"];
        if (!list.is_array() || list.empty())
            config_error("testbeds", "expected a non-empty list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            auto more = testbeds_from_json(list[i], "testbeds[" + std::to_string(i) + "]");
            c.testbeds.insert(c.testbeds.end(), more.begin(), more.end());
        }
    }

    std::optional<double> lambda;
    if (j.contains("lambda")) {
        lambda = get_as<double>(j["lambda"], "lambda");
        if (!(*lambda >= 0.0) || !std::isfinite(*lambda))
            config_error("lambda", "must be a finite value >= 0");
    }

    if (!j.contains("methods") || j["methods"] == "all") {
        for (PolicyKind k : kAllPolicies)
            c.methods.push_back(SelectionPolicy::of(k));
    } else {
        const auto& list = j["methods"];
        if (!list.is_array() || list.empty())
            config_error("methods", "expected \"all\" or a non-empty list of policy names");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string at = "methods[" + std::to_string(i) + "]";
            const auto text = get_as<std::string>(list[i], at);
            const auto kind = parse_policy(text);
            if (!kind)
                config_error(at, "unknown policy '" + text + "'");
            c.methods.push_back(SelectionPolicy::of(*kind));
        }
    }
    if (lambda) {
        for (auto& m : c.methods) {
            if (m.kind == PolicyKind::UcbIndividual || m.kind == PolicyKind::UcbCell)
                m.lambda = *lambda;
        }
    }

    if (j.contains("runs"))
        c.runs = get_count(j["runs"], "runs");
    if (c.runs < 1)
        config_error("runs", "must be at least 1");
    if (j.contains("seed"))
        c.seed = get_count(j["seed"], "seed");
    if (j.contains("budget"))
        c.budget = get_count(j["budget"], "budget");
    if (c.budget < 1)
        config_error("budget", "must be at least 1");
    if (j.contains("init_population"))
        c.init_population = get_count(j["init_population"], "init_population");
    if (c.init_population < 1)
        config_error("init_population", "must be at least 1");
    if (j.contains("resolution"))
        c.resolution = resolution_from_json(j["resolution"], "resolution");
    if (j.contains("checkpoints")) {
        const auto& list = j["checkpoints"];
        if (!list.is_array())
            config_error("checkpoints", "expected a list of evaluation counts");
        for (std::size_t i = 0; i < list.size(); ++i)
            c.checkpoints.push_back(get_count(list[i], "checkpoints[" + std::to_string(i) + "]"));
    }
    if (j.contains("grids"))
        c.grids = get_as<bool>(j["grids"], "grids");
    if (j.contains("jobs"))
        c.jobs = get_count(j["jobs"], "jobs");
    if (j.contains("analysis")) {
        const auto& a = j["analysis"];
        if (!a.is_object())
            config_error("analysis", "expected an object");
        reject_unknown_keys(a, "analysis", {"alpha", "comparisons", "one_sided"});
        if (a.contains("alpha"))
            c.analysis.alpha = get_as<double>(a["alpha"], "analysis.alpha");
        if (!(c.analysis.alpha > 0.0 && c.analysis.alpha < 1.0))
            config_error("analysis.alpha", "must lie in (0, 1)");
        if (a.contains("comparisons"))
            c.analysis.comparisons = get_as<double>(a["comparisons"], "analysis.comparisons");
        if (!(c.analysis.comparisons >= 1.0))
            config_error("analysis.comparisons", "must be at least 1");
        if (a.contains("one_sided"))
            c.analysis.one_sided = get_as<bool>(a["one_sided"], "analysis.one_sided");
    }

    // Per-run checks (checkpoint ordering against the budget and so on).
    for (const auto& run : expand(c)) {
        try {
            validate(run);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what());
        }
        break;
    }
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    return parse_experiment_config(j);
}

std::vector<RunConfig> expand(const ExperimentConfig& config)
{
    std::vector<RunConfig> out;
    for (const auto& testbed : config.testbeds) {
        for (const auto& method : config.methods) {
            for (std::size_t r = 0; r < config.runs; ++r) {
                RunConfig rc;
                rc.testbed = testbed;
                rc.policy = method;
                rc.seed = config.seed + out.size();
                rc.budget = config.budget;
                rc.init_population = config.init_population;
                rc.resolution = config.resolution;
                rc.checkpoints = config.checkpoints;
                out.push_back(std::move(rc));
            }
        }
    }
    return out;
}

json to_json(const TestbedParams& params)
{
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, RastriginParams>) {
                return {{"name", "rastrigin6"}, {"maximize", p.maximize}};
            } else if constexpr (std::is_same_v<T, ArmParams>) {
                return {{"name", "arm" + std::to_string(p.joints)}, {"joints", p.joints}, {"lengths", p.lengths}};
            } else {
                return {{"name", "maze"},
                        {"width", p.width},
                        {"height", p.height},
                        {"fitness_metric", std::string(1, metric_letter(p.assignment.fitness))},
                        {"behavior_metrics",
                         {std::string(1, metric_letter(p.assignment.behavior[0])),
                          std::string(1, metric_letter(p.assignment.behavior[1]))}},
                        {"path_count", p.path_count == PathCount::Tiles ? "tiles" : "moves"}};
            }
        },
        params);
}

json to_json(const RunConfig& config)
{
    const Resolution res = resolved_resolution(config);
    return {{"testbed", to_json(config.testbed)},
            {"policy", std::string(policy_name(config.policy.kind))},
            {"lambda", config.policy.lambda},
            {"seed", config.seed},
            {"budget", config.budget},
            {"init_population", config.init_population},
            {"resolution", {res.rows, res.cols}},
            {"checkpoints", resolved_checkpoints(config)},
            {"rng", std::string(Rng::algorithm)}};
}

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < length; ++i)
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return out.str();
}

std::string sha256_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return sha256_hex(buffer.str());
}

} // namespace banditqd
