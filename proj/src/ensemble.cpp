#include "uatta/ensemble.hpp"

#include <fmt/format.h>

#include "uatta/uncertainty.hpp"

namespace uatta {

std::string_view strategy_name(StrategyKind kind)
{
    switch (kind) {
    case StrategyKind::single: return "single";
    case StrategyKind::mean_ensemble: return "mean";
    case StrategyKind::tta_ensemble: return "tta";
    case StrategyKind::ua_ensemble: return "ua";
    case StrategyKind::uatta_ens: return "uatta";
    }
    return "?";
}

std::string_view strategy_title(StrategyKind kind)
{
    switch (kind) {
    case StrategyKind::single: return "Baseline (single model)";
    case StrategyKind::mean_ensemble: return "Ensemble";
    case StrategyKind::tta_ensemble: return "TTAug Ensemble";
    case StrategyKind::ua_ensemble: return "Uncertainty Aware Ensemble";
    case StrategyKind::uatta_ens: return "UATTA-ENS";
    }
    return "?";
}

StrategyKind parse_strategy(std::string_view name)
{
    for (auto k : {StrategyKind::single, StrategyKind::mean_ensemble, StrategyKind::tta_ensemble,
                   StrategyKind::ua_ensemble, StrategyKind::uatta_ens}) {
        if (strategy_name(k) == name) {
            return k;
        }
    }
    throw Error(fmt::format("unknown strategy '{}' (expected single, mean, tta, ua or uatta)", name));
}

ProbabilityVector tta_aggregate(std::span<const ProbabilityVector> replicates)
{
    if (replicates.empty()) {
        throw Error("TTA aggregation over zero replicates");
    }
    if (replicates.size() == 1) {
        return replicates.front();
    }
    auto mean = mean_probabilities(replicates);
    const double s = mean.sum();
    std::vector<double> p(mean.values().begin(), mean.values().end());
    for (double& v : p) {
        v /= s;
    }
    return ProbabilityVector(std::move(p));
}

ProbabilityVector weighted_ensemble(std::span<const ProbabilityVector> members, std::span<const double> weights)
{
    if (members.empty()) {
        throw Error("weighted ensemble over zero members");
    }
    if (members.size() != weights.size()) {
        throw Error(fmt::format("{} member forecasts but {} weights", members.size(), weights.size()));
    }
    const std::size_t classes = members.front().size();
    std::vector<double> out(classes, 0.0);
    for (std::size_t j = 0; j < members.size(); ++j) {
        if (members[j].size() != classes) {
            throw Error("member forecasts of unequal length");
        }
        for (std::size_t c = 0; c < classes; ++c) {
            out[c] += weights[j] * members[j][c];
        }
    }
    return ProbabilityVector(std::move(out));
}

std::vector<ProbabilityVector> run_strategy(const PredictionSet& set, const AggregationStrategy& strategy)
{
    const int replicates = strategy.replicates;
    if (replicates < 1) {
        throw Error(fmt::format("replicate count must be >= 1, got {}", replicates));
    }
    if (!strategy.uses_tta() && replicates != 1) {
        throw Error(fmt::format("strategy '{}' uses only the original image (replicates = 1), got {}",
                                strategy_name(strategy.kind), replicates));
    }
    const auto cube = set.restricted_to_replicates(replicates).cube();
    if (cube.num_replicates < replicates) {
        throw Error(fmt::format("missing replicates: strategy '{}' needs {} per (sample, model), set has {}",
                                strategy_name(strategy.kind), replicates, cube.num_replicates));
    }

    const std::size_t n = cube.num_samples();
    const int k = cube.num_models;
    std::vector<ProbabilityVector> out;
    out.reserve(n);

    if (strategy.kind == StrategyKind::single) {
        const int m = strategy.model_index.value_or(1);
        if (m < 1 || m > k) {
            throw Error(fmt::format("model index {} outside [1, {}]", m, k));
        }
        for (std::size_t s = 0; s < n; ++s) {
            out.push_back(cube.probs[s][m - 1].front());
        }
        return out;
    }

    const bool uncertainty_weighted =
        strategy.kind == StrategyKind::ua_ensemble || strategy.kind == StrategyKind::uatta_ens;
    std::vector<std::vector<double>> weights(n, std::vector<double>(k, 1.0 / k));
    if (uncertainty_weighted && k >= 2) {
        weights = build_uncertainty_table(cube).weight;
    }

    std::vector<ProbabilityVector> members(k);
    for (std::size_t s = 0; s < n; ++s) {
        for (int m = 0; m < k; ++m) {
            members[m] = tta_aggregate(cube.probs[s][m]);
        }
        out.push_back(weighted_ensemble(members, weights[s]));
    }
    return out;
}

}  // namespace uatta
