#pragma once

#include "banditqd/metrics.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace banditqd {

/// One metrics-CSV row: a checkpoint of one run.
struct MetricRow {
    std::string run_id;
    std::string method;
    std::string testbed;
    MetricVector metrics;
};

/// Trapezoidal area under `values` over the (linear) evaluation axis.
double auc(std::span<const double> checkpoints, std::span<const double> values);

struct WelchResult {
    double t = 0.0;
    double dof = 0.0;
    double p = 1.0; // two-sided
};

/// Unequal-variance two-sample t-test.
///
/// Degenerate inputs where both samples have zero variance return p = 1 for
/// equal means and p = 0 otherwise (t is then 0 or +/-infinity).
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided(double t, double dof);

struct AucSample {
    std::string treatment;
    std::string method;
    MetricId metric = MetricId::Coverage;
    double auc = 0.0;
    std::string run_id;
};

/// AUC of every performance metric for every run in `rows`.
std::vector<AucSample> auc_samples(std::span<const MetricRow> rows);

struct SignificanceOptions {
    double alpha = 0.05;
    double comparisons = 8; // Bonferroni divisor
    bool one_sided = false;
};

/// Wins per (metric, method), summed over treatments.
struct SignificanceTable {
    std::vector<std::string> methods; // table column order
    std::vector<MetricId> metrics;
    /// wins[metric][method]
    std::vector<std::vector<int>> wins;
    /// beats[metric][a][b]: treatments in which method a beat method b
    std::vector<std::vector<std::vector<int>>> beats;
    std::size_t treatments = 0;

    int wins_of(MetricId metric, const std::string& method) const;
    int beats_count(MetricId metric, const std::string& a, const std::string& b) const;
};

SignificanceTable significance_counts(std::span<const AucSample> samples, const SignificanceOptions& options = {});

struct ProgressPoint {
    std::string treatment;
    std::string method;
    MetricId metric = MetricId::Coverage;
    std::uint64_t evaluations = 0;
    double mean = 0.0;
    double half_width = 0.0; // 1.96 standard errors
    std::size_t runs = 0;
};

/// Mean and normal-approximation 95% interval per checkpoint, metric, method
/// and treatment.
std::vector<ProgressPoint> progress_summary(std::span<const MetricRow> rows);

/// Orders method names by the canonical policy order, unknown names last.
std::vector<std::string> canonical_method_order(std::vector<std::string> methods);

} // namespace banditqd
