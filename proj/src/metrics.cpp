#include "uatta/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <fmt/format.h>

namespace uatta {

namespace {

void check_forecasts(std::span<const ProbabilityVector> forecasts, std::span<const GradeLabel> labels)
{
    if (forecasts.empty()) {
        throw Error("no samples");
    }
    if (forecasts.size() != labels.size()) {
        throw Error(fmt::format("{} forecasts but {} labels", forecasts.size(), labels.size()));
    }
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const int y = labels[i].value;
        if (y < 0 || y >= static_cast<int>(forecasts[i].size())) {
            throw Error(fmt::format("sample {}: label {} outside forecast classes", i, y));
        }
    }
}

double bin_edge(int m, int num_bins)
{
    return static_cast<double>(m) / static_cast<double>(num_bins);
}

}  // namespace

int bin_for_confidence(double confidence, int num_bins)
{
    int m = static_cast<int>(std::ceil(confidence * num_bins));
    m = std::clamp(m, 1, num_bins);
    // ceil(c * M) can land one bin off when c sits on an edge; settle against the edges themselves.
    while (m > 1 && confidence <= bin_edge(m - 1, num_bins)) {
        --m;
    }
    while (m < num_bins && confidence > bin_edge(m, num_bins)) {
        ++m;
    }
    return m;
}

std::vector<BinStat> compute_bins(std::span<const ProbabilityVector> forecasts, std::span<const GradeLabel> labels,
                                  int num_bins)
{
    if (num_bins < 1) {
        throw Error(fmt::format("number of bins must be >= 1, got {}", num_bins));
    }
    check_forecasts(forecasts, labels);

    std::vector<BinStat> bins(num_bins);
    std::vector<long> correct(num_bins, 0);
    std::vector<double> conf_sum(num_bins, 0.0);
    for (int m = 1; m <= num_bins; ++m) {
        bins[m - 1].bin_index = m;
        bins[m - 1].lower = bin_edge(m - 1, num_bins);
        bins[m - 1].upper = bin_edge(m, num_bins);
    }
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const double conf = forecasts[i].confidence();
        const int m = bin_for_confidence(conf, num_bins) - 1;
        bins[m].count += 1;
        conf_sum[m] += conf;
        if (forecasts[i].argmax() == labels[i].value) {
            correct[m] += 1;
        }
    }
    for (int m = 0; m < num_bins; ++m) {
        if (bins[m].count > 0) {
            const auto count = static_cast<double>(bins[m].count);
            bins[m].accuracy = static_cast<double>(correct[m]) / count;
            bins[m].confidence = conf_sum[m] / count;
        }
    }
    return bins;
}

double ece(std::span<const BinStat> bins, long n)
{
    if (n <= 0) {
        throw Error("ECE over zero samples");
    }
    double weighted = 0.0;
    double worst = 0.0;
    for (const auto& b : bins) {
        const double gap = std::abs(b.accuracy - b.confidence);
        weighted += static_cast<double>(b.count) * gap;
        if (b.count > 0) worst = std::max(worst, gap);
    }
    // A weighted mean of the gaps; the clamp removes the last-ulp overshoot
    // the division can produce when a single bin is populated.
    return std::min(weighted / static_cast<double>(n), worst);
}

double mce(std::span<const BinStat> bins)
{
    double worst = -1.0;
    for (const auto& b : bins) {
        if (b.count > 0) {
            worst = std::max(worst, std::abs(b.accuracy - b.confidence));
        }
    }
    if (worst < 0.0) {
        throw Error("MCE over bins that are all empty");
    }
    return worst;
}

double brier(std::span<const ProbabilityVector> forecasts, std::span<const GradeLabel> labels)
{
    check_forecasts(forecasts, labels);
    double total = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < forecasts[i].size(); ++c) {
            const double outcome = static_cast<int>(c) == labels[i].value ? 1.0 : 0.0;
            const double d = forecasts[i][c] - outcome;
            s += d * d;
        }
        total += s;
    }
    return total / static_cast<double>(forecasts.size());
}

double qwk(std::span<const GradeLabel> predicted, std::span<const GradeLabel> actual, int num_classes)
{
    if (predicted.empty()) {
        throw Error("no samples");
    }
    if (predicted.size() != actual.size()) {
        throw Error(fmt::format("{} predicted labels but {} actual", predicted.size(), actual.size()));
    }
    if (num_classes < 1) {
        throw Error("number of classes must be >= 1");
    }
    std::vector<std::int64_t> hist_pred(num_classes, 0);
    std::vector<std::int64_t> hist_act(num_classes, 0);
    // Both sums below are integers scaled by 1 / (C - 1)^2; keeping them integral
    // makes the result exactly symmetric in its arguments.
    std::int64_t observed = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const int p = predicted[i].value;
        const int a = actual[i].value;
        if (p < 0 || p >= num_classes || a < 0 || a >= num_classes) {
            throw Error(fmt::format("sample {}: grade outside [0, {}]", i, num_classes - 1));
        }
        ++hist_pred[p];
        ++hist_act[a];
        observed += static_cast<std::int64_t>(p - a) * (p - a);
    }
    std::int64_t expected_scaled = 0;  // n * sum(w E) * (C - 1)^2
    for (int i = 0; i < num_classes; ++i) {
        for (int j = i + 1; j < num_classes; ++j) {
            const std::int64_t d2 = static_cast<std::int64_t>(i - j) * (i - j);
            expected_scaled += d2 * (hist_pred[i] * hist_act[j] + hist_pred[j] * hist_act[i]);
        }
    }
    // expected_scaled is 0 only when both raters use one and the same grade, which
    // forces observed to 0 as well; the throw is a guard, not a reachable case.
    if (expected_scaled == 0) {
        if (observed == 0) {
            return 1.0;
        }
        throw Error("degenerate marginals");
    }
    const auto n = static_cast<double>(predicted.size());
    return 1.0 - (static_cast<double>(observed) * n) / static_cast<double>(expected_scaled);
}

CalibrationReport evaluate_forecasts(std::span<const ProbabilityVector> forecasts, std::span<const GradeLabel> labels,
                                     int num_classes, int num_bins)
{
    CalibrationReport report;
    report.bins = compute_bins(forecasts, labels, num_bins);
    report.n = static_cast<long>(forecasts.size());
    report.num_bins = num_bins;
    report.ece = ece(report.bins, report.n);
    report.mce = mce(report.bins);
    report.brier = brier(forecasts, labels);

    std::vector<GradeLabel> decisions;
    decisions.reserve(forecasts.size());
    for (const auto& f : forecasts) {
        decisions.push_back(GradeLabel{f.argmax()});
    }
    report.qwk = qwk(decisions, labels, num_classes);
    return report;
}

CalibrationReport full_report(const PredictionSet& set, std::span<const ProbabilityVector> aggregated, int num_bins)
{
    const auto cube = set.cube();
    if (aggregated.size() != cube.num_samples()) {
        throw Error(fmt::format("{} aggregated forecasts for {} samples", aggregated.size(), cube.num_samples()));
    }
    return evaluate_forecasts(aggregated, cube.labels, cube.num_classes, num_bins);
}

}  // namespace uatta
