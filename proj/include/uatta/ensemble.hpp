#ifndef UATTA_ENSEMBLE_HPP
#define UATTA_ENSEMBLE_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uatta/core.hpp"

namespace uatta {

enum class StrategyKind {
    single,         // one member, original image
    mean_ensemble,  // equal weights, original image
    tta_ensemble,   // equal weights over TTA-averaged members
    ua_ensemble,    // inverse-uncertainty weights, original image
    uatta_ens,      // inverse-uncertainty weights over TTA-averaged members
};

// `replicates` counts the replicate rows aggregated per (sample, model):
// replicate ids 0..replicates-1, where 0 is the original image.
struct AggregationStrategy {
    StrategyKind kind{StrategyKind::uatta_ens};
    int replicates{1};
    std::optional<int> model_index;  // 1-based, single only

    [[nodiscard]] bool uses_tta() const
    {
        return kind == StrategyKind::tta_ensemble || kind == StrategyKind::uatta_ens;
    }
};

// CLI names: single, mean, tta, ua, uatta.
std::string_view strategy_name(StrategyKind kind);
StrategyKind parse_strategy(std::string_view name);

// Table-style row label for a strategy.
std::string_view strategy_title(StrategyKind kind);

// Mean of the replicate vectors renormalized to the simplex; a single replicate is returned as is.
ProbabilityVector tta_aggregate(std::span<const ProbabilityVector> replicates);

// sum_j w_j * p_j elementwise.
ProbabilityVector weighted_ensemble(std::span<const ProbabilityVector> members, std::span<const double> weights);

// Per-sample forecasts in sample_id order.
std::vector<ProbabilityVector> run_strategy(const PredictionSet& set, const AggregationStrategy& strategy);

}  // namespace uatta

#endif  // UATTA_ENSEMBLE_HPP
