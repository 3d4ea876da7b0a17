#include "uatta/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "uatta/ensemble.hpp"

namespace uatta {

double model_scalar_prediction(std::span<const ProbabilityVector> replicates)
{
    return static_cast<double>(tta_aggregate(replicates).argmax());
}

double llfu_sigma(double y, double mu, double var)
{
    if (var < 0.0) {
        throw Error(fmt::format("negative variance {}", var));
    }
    if (var < kVarianceEpsilon) {
        // log term is floored at 0 for tiny var
        return y == mu ? 0.0 : kSigmaMax;
    }
    const double log_term = std::max(0.0, 0.5 * std::log(2.0 * std::numbers::pi * var));
    const double dev = y - mu;
    return log_term + dev * dev / (2.0 * var);
}

std::vector<double> ensemble_weights(std::span<const double> sigmas)
{
    if (sigmas.empty()) {
        throw Error("ensemble weights for zero models");
    }
    std::vector<double> floored(sigmas.size());
    for (std::size_t j = 0; j < sigmas.size(); ++j) {
        if (!(sigmas[j] >= 0.0)) {
            throw Error(fmt::format("sigma {} for model {} is negative", sigmas[j], j + 1));
        }
        floored[j] = std::max(sigmas[j], kSigmaFloor);
    }
    // (1/s_j) / sum_i (1/s_i) == 1 / sum_i (s_j / s_i); the second form gives
    // exactly 1/k when all sigmas coincide.
    std::vector<double> weights(sigmas.size());
    for (std::size_t j = 0; j < floored.size(); ++j) {
        double denom = 0.0;
        for (double s : floored) {
            denom += floored[j] / s;
        }
        weights[j] = 1.0 / denom;
    }
    return weights;
}

double mode_of(std::span<const double> values)
{
    if (values.empty()) {
        throw Error("mode of an empty list");
    }
    std::map<double, int> counts;
    for (double v : values) {
        ++counts[v];
    }
    double best = counts.begin()->first;
    int best_count = 0;
    for (const auto& [v, c] : counts) {
        if (c > best_count) {
            best = v;
            best_count = c;
        }
    }
    return best;
}

double population_variance(std::span<const double> values)
{
    if (values.empty()) {
        throw Error("variance of an empty list");
    }
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return ss / static_cast<double>(values.size());
}

UncertaintyTable build_uncertainty_table(const PredictionCube& cube)
{
    if (cube.num_models < 2) {
        throw Error(fmt::format("ensemble requires >= 2 models, got {}", cube.num_models));
    }
    UncertaintyTable table;
    table.sample_ids = cube.sample_ids;
    const std::size_t n = cube.num_samples();
    table.mu.resize(n);
    table.var.resize(n);
    table.sigma.assign(n, std::vector<double>(cube.num_models));
    table.weight.assign(n, std::vector<double>(cube.num_models));

    std::vector<double> y(cube.num_models);
    for (std::size_t s = 0; s < n; ++s) {
        for (int m = 0; m < cube.num_models; ++m) {
            y[m] = model_scalar_prediction(cube.probs[s][m]);
        }
        table.mu[s] = mode_of(y);
        table.var[s] = population_variance(y);
        for (int m = 0; m < cube.num_models; ++m) {
            table.sigma[s][m] = llfu_sigma(y[m], table.mu[s], table.var[s]);
        }
        table.weight[s] = ensemble_weights(table.sigma[s]);
    }
    return table;
}

UncertaintyTable build_uncertainty_table(const PredictionSet& set)
{
    return build_uncertainty_table(set.cube());
}

}  // namespace uatta
