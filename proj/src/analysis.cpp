#include "banditqd/analysis.hpp"

#include "banditqd/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace banditqd {

namespace {

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0; // unbiased
};

MeanVar mean_var(std::span<const double> x)
{
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x)
        ss += (v - mean) * (v - mean);
    return {mean, ss / (n - 1.0)};
}

// Lentz's method for the continued fraction of I_x(a, b).
double beta_continued_fraction(double a, double b, double x)
{
    constexpr int kMaxIterations = 10'000;
    constexpr double kEpsilon = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny)
        d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEpsilon)
            break;
    }
    return h;
}

} // namespace

double auc(std::span<const double> checkpoints, std::span<const double> values)
{
    if (checkpoints.size() != values.size())
        throw AnalysisFault("auc: checkpoint and value series differ in length");
    if (checkpoints.size() < 2)
        throw AnalysisFault("auc: need at least two checkpoints");
    double area = 0.0;
    for (std::size_t i = 1; i < checkpoints.size(); ++i) {
        const double width = checkpoints[i] - checkpoints[i - 1];
        if (!(width > 0.0))
            throw AnalysisFault("auc: checkpoints must be strictly increasing");
        area += 0.5 * width * (values[i] + values[i - 1]);
    }
    return area;
}

double incomplete_beta(double a, double b, double x)
{
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double dof)
{
    if (std::isnan(t))
        return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t))
        return 0.0;
    return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b)
{
    if (a.size() < 2 || b.size() < 2)
        throw AnalysisFault("welch_t: each sample needs at least two values");
    const MeanVar ma = mean_var(a);
    const MeanVar mb = mean_var(b);
    const double va = ma.variance / static_cast<double>(a.size());
    const double vb = mb.variance / static_cast<double>(b.size());
    const double se2 = va + vb;
    if (se2 == 0.0) {
        if (ma.mean == mb.mean)
            return {0.0, static_cast<double>(a.size() + b.size() - 2), 1.0};
        const double inf = std::numeric_limits<double>::infinity();
        return {ma.mean > mb.mean ? inf : -inf, static_cast<double>(a.size() + b.size() - 2), 0.0};
    }
    const double t = (ma.mean - mb.mean) / std::sqrt(se2);
    const double dof =
        se2 * se2 / (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    return {t, dof, student_t_two_sided(t, dof)};
}

std::vector<std::string> canonical_method_order(std::vector<std::string> methods)
{
    const auto rank = [](const std::string& m) {
        const auto kind = parse_policy(m);
        if (!kind)
            return kAllPolicies.size();
        return static_cast<std::size_t>(std::find(kAllPolicies.begin(), kAllPolicies.end(), *kind) - kAllPolicies.begin());
    };
    std::sort(methods.begin(), methods.end());
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
    std::stable_sort(methods.begin(), methods.end(),
                     [&](const std::string& x, const std::string& y) { return rank(x) < rank(y); });
    return methods;
}

std::vector<AucSample> auc_samples(std::span<const MetricRow> rows)
{
    using RunKey = std::tuple<std::string, std::string, std::string>; // treatment, method, run
    std::map<RunKey, std::vector<const MetricRow*>> runs;
    for (const auto& row : rows)
        runs[{row.testbed, row.method, row.run_id}].push_back(&row);

    std::map<std::string, std::vector<double>> grids; // per treatment
    std::vector<AucSample> out;
    for (auto& [key, series] : runs) {
        std::stable_sort(series.begin(), series.end(), [](const MetricRow* x, const MetricRow* y) {
            return x->metrics.evaluations < y->metrics.evaluations;
        });
        std::vector<double> x;
        for (const auto* r : series)
            x.push_back(static_cast<double>(r->metrics.evaluations));
        const auto& treatment = std::get<0>(key);
        const auto [grid, inserted] = grids.emplace(treatment, x);
        if (!inserted && grid->second != x)
            throw AnalysisFault("runs of treatment " + treatment + " use different checkpoint grids");
        for (MetricId metric : kPerformanceMetrics) {
            std::vector<double> y;
            for (const auto* r : series)
                y.push_back(metric_value(r->metrics, metric));
            out.push_back({treatment, std::get<1>(key), metric, auc(x, y), std::get<2>(key)});
        }
    }
    return out;
}

int SignificanceTable::wins_of(MetricId metric, const std::string& method) const
{
    const auto mi = std::find(metrics.begin(), metrics.end(), metric) - metrics.begin();
    const auto ci = std::find(methods.begin(), methods.end(), method) - methods.begin();
    if (mi >= static_cast<long>(metrics.size()) || ci >= static_cast<long>(methods.size()))
        return 0;
    return wins[mi][ci];
}

int SignificanceTable::beats_count(MetricId metric, const std::string& a, const std::string& b) const
{
    const auto mi = std::find(metrics.begin(), metrics.end(), metric) - metrics.begin();
    const auto ai = std::find(methods.begin(), methods.end(), a) - methods.begin();
    const auto bi = std::find(methods.begin(), methods.end(), b) - methods.begin();
    if (mi >= static_cast<long>(metrics.size()) || ai >= static_cast<long>(methods.size())
        || bi >= static_cast<long>(methods.size()))
        return 0;
    return beats[mi][ai][bi];
}

SignificanceTable significance_counts(std::span<const AucSample> samples, const SignificanceOptions& options)
{
    SignificanceTable table;
    std::vector<std::string> names;
    for (const auto& s : samples)
        names.push_back(s.method);
    table.methods = canonical_method_order(std::move(names));
    table.metrics.assign(kPerformanceMetrics.begin(), kPerformanceMetrics.end());
    const std::size_t methods = table.methods.size();
    table.wins.assign(table.metrics.size(), std::vector<int>(methods, 0));
    table.beats.assign(table.metrics.size(), std::vector<std::vector<int>>(methods, std::vector<int>(methods, 0)));

    // treatment -> metric -> method index -> AUC values
    std::map<std::string, std::map<MetricId, std::vector<std::vector<double>>>> grouped;
    for (const auto& s : samples) {
        auto& per_method = grouped[s.treatment][s.metric];
        per_method.resize(methods);
        const auto at = std::find(table.methods.begin(), table.methods.end(), s.method) - table.methods.begin();
        per_method[at].push_back(s.auc);
    }
    table.treatments = grouped.size();

    const double threshold = options.alpha / options.comparisons;
    for (const auto& [treatment, by_metric] : grouped) {
        for (std::size_t mi = 0; mi < table.metrics.size(); ++mi) {
            const auto found = by_metric.find(table.metrics[mi]);
            if (found == by_metric.end())
                continue;
            const auto& values = found->second;
            for (std::size_t a = 0; a < methods; ++a) {
                for (std::size_t b = 0; b < methods; ++b) {
                    if (a == b || values[a].size() < 2 || values[b].size() < 2)
                        continue;
                    const WelchResult w = welch_t(values[a], values[b]);
                    if (!(w.t > 0.0))
                        continue;
                    const double p = options.one_sided ? 0.5 * w.p : w.p;
                    if (p < threshold) {
                        ++table.beats[mi][a][b];
                        ++table.wins[mi][a];
                    }
                }
            }
        }
    }
    return table;
}

std::vector<ProgressPoint> progress_summary(std::span<const MetricRow> rows)
{
    using Key = std::tuple<std::string, std::string, std::uint64_t>;
    std::map<Key, std::vector<const MetricVector*>> groups;
    for (const auto& row : rows)
        groups[{row.testbed, row.method, row.metrics.evaluations}].push_back(&row.metrics);

    std::vector<ProgressPoint> out;
    for (const auto& [key, vectors] : groups) {
        for (MetricId metric : kAllMetrics) {
            const double n = static_cast<double>(vectors.size());
            double mean = 0.0;
            for (const auto* v : vectors)
                mean += metric_value(*v, metric);
            mean /= n;
            double ss = 0.0;
            for (const auto* v : vectors)
                ss += (metric_value(*v, metric) - mean) * (metric_value(*v, metric) - mean);
            // Standard error from the population standard deviation.
            const double se = std::sqrt(ss / n) / std::sqrt(n);
            out.push_back({std::get<0>(key), std::get<1>(key), metric, std::get<2>(key), mean, 1.96 * se,
                           vectors.size()});
        }
    }
    return out;
}

} // namespace banditqd
