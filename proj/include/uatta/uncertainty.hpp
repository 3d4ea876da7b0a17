#ifndef UATTA_UNCERTAINTY_HPP
#define UATTA_UNCERTAINTY_HPP

#include <span>
#include <string>
#include <vector>

#include "uatta/core.hpp"

namespace uatta {

// Below this ensemble variance the squared-deviation term is not divided by var.
inline constexpr double kVarianceEpsilon = 1e-12;
// Floor applied to sigma before inversion in the ensemble weights.
inline constexpr double kSigmaFloor = 1e-6;
// Deviation term assigned to a dissenting model when the variance is degenerate.
inline constexpr double kSigmaMax = 1e6;

// Predicted grade of one model: argmax of its replicate-averaged probabilities.
double model_scalar_prediction(std::span<const ProbabilityVector> replicates);

// max(0, log(2 pi var) / 2) + (y - mu)^2 / (2 var), with the degenerate-variance rule.
double llfu_sigma(double y, double mu, double var);

// w_j proportional to 1 / max(sigma_j, kSigmaFloor), normalized to sum to 1.
std::vector<double> ensemble_weights(std::span<const double> sigmas);

// Most frequent value; ties go to the smallest.
double mode_of(std::span<const double> values);
double population_variance(std::span<const double> values);

struct UncertaintyTable {
    std::vector<std::string> sample_ids;
    std::vector<double> mu;                   // per sample
    std::vector<double> var;                  // per sample
    std::vector<std::vector<double>> sigma;   // [sample][model]
    std::vector<std::vector<double>> weight;  // [sample][model]

    [[nodiscard]] std::size_t num_samples() const { return sample_ids.size(); }
};

// Uses every replicate present in the set. Requires at least two models.
UncertaintyTable build_uncertainty_table(const PredictionSet& set);
UncertaintyTable build_uncertainty_table(const PredictionCube& cube);

}  // namespace uatta

#endif  // UATTA_UNCERTAINTY_HPP
