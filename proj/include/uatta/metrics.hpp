#ifndef UATTA_METRICS_HPP
#define UATTA_METRICS_HPP

#include <span>
#include <vector>

#include "uatta/core.hpp"

namespace uatta {

inline constexpr int kDefaultBins = 10;

// One confidence bin of a reliability diagram. Bin m (1-based) covers
// ((m-1)/M, m/M]; bin 1 also takes confidence 0.
struct BinStat {
    int bin_index{1};
    double lower{0.0};
    double upper{1.0};
    long count{0};
    double accuracy{0.0};
    double confidence{0.0};
};

struct CalibrationReport {
    double ece{0.0};
    double mce{0.0};
    double brier{0.0};
    double qwk{0.0};
    std::vector<BinStat> bins;
    long n{0};
    int num_bins{kDefaultBins};
};

// 1-based bin for a top-class confidence.
int bin_for_confidence(double confidence, int num_bins);

std::vector<BinStat> compute_bins(std::span<const ProbabilityVector> forecasts, std::span<const GradeLabel> labels,
                                  int num_bins);

// Sum over bins of (|B_m| / n) * |acc - conf|.
double ece(std::span<const BinStat> bins, long n);

// Largest |acc - conf| over non-empty bins.
double mce(std::span<const BinStat> bins);

// Multi-class Brier: mean over samples of the squared distance to the one-hot label.
double brier(std::span<const ProbabilityVector> forecasts, std::span<const GradeLabel> labels);

// Cohen's kappa with quadratic weights (i - j)^2 / (C - 1)^2.
double qwk(std::span<const GradeLabel> predicted, std::span<const GradeLabel> actual, int num_classes);

// Metrics of per-sample forecasts against labels; qwk uses argmax decisions.
CalibrationReport evaluate_forecasts(std::span<const ProbabilityVector> forecasts, std::span<const GradeLabel> labels,
                                     int num_classes, int num_bins);

// `aggregated` is indexed like set.cube().sample_ids.
CalibrationReport full_report(const PredictionSet& set, std::span<const ProbabilityVector> aggregated, int num_bins);

}  // namespace uatta

#endif  // UATTA_METRICS_HPP
