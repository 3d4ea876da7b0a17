#include "uatta/experiment.hpp"

#include <cmath>
#include <future>

#include <fmt/format.h>

#include "uatta/ensemble.hpp"
#include "uatta/metrics.hpp"
#include "uatta/random.hpp"

namespace uatta {

void ExperimentConfig::validate() const
{
    auto bad = [](const std::string& why) { return Error(fmt::format("invalid config: {}", why)); };
    if (n_samples < 10) throw bad("n_samples must be >= 10");
    if (class_priors.size() < 2) throw bad("need at least two class priors");
    double s = 0.0;
    for (double p : class_priors) {
        if (!(p > 0.0)) throw bad("class priors must be > 0");
        s += p;
    }
    if (std::abs(s - 1.0) > kSimplexTolerance) throw bad(fmt::format("class priors sum to {}", s));
    if (!(difficulty >= 0.0 && difficulty <= 1.0)) throw bad("difficulty must lie in [0, 1]");
    if (models < 1) throw bad("models must be >= 1");
    if (epochs < 1) throw bad("epochs must be >= 1");
    if (!(lr > 0.0)) throw bad("lr must be > 0");
    if (batch_size < 1) throw bad("batch size must be >= 1");
    if (replicates < 0) throw bad("replicates must be >= 0");
    if (train_views < 0) throw bad("train views must be >= 0");
    if (bins < 1) throw bad("bins must be >= 1");
    if (!(crop_scale.lo > 0.0 && crop_scale.lo <= crop_scale.hi && crop_scale.hi <= 1.0)) {
        throw bad("crop scale range must lie in (0, 1]");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw bad("train fraction must lie in (0, 1)");
    if (raw_side < 16) throw bad("raw image side must be >= 16");
    if (image_side < 1) throw bad("image side must be >= 1");
}

std::string ExperimentConfig::describe() const
{
    std::string priors;
    for (std::size_t c = 0; c < class_priors.size(); ++c) {
        priors += (c ? "," : "") + fmt::format("{}", class_priors[c]);
    }
    std::string out;
    out += fmt::format("seed: {}\n", seed);
    out += fmt::format("n_samples: {}\n", n_samples);
    out += fmt::format("class_priors: {}\n", priors);
    out += fmt::format("difficulty: {}\n", difficulty);
    out += fmt::format("models: {}\n", models);
    out += fmt::format("epochs: {}\n", epochs);
    out += fmt::format("lr: {}\n", lr);
    out += fmt::format("batch_size: {}\n", batch_size);
    out += fmt::format("replicates: {}\n", replicates);
    out += fmt::format("train_views: {}\n", train_views);
    out += fmt::format("bins: {}\n", bins);
    out += fmt::format("crop_scale: {},{}\n", crop_scale.lo, crop_scale.hi);
    out += fmt::format("train_fraction: {}\n", train_fraction);
    out += fmt::format("raw_side: {}\n", raw_side);
    out += fmt::format("image_side: {}\n", image_side);
    return out;
}

std::uint64_t member_seed(std::uint64_t experiment_seed, int member)
{
    return combine_keys(combine_keys(experiment_seed, fnv1a("member")), static_cast<std::uint64_t>(member));
}

namespace {

template <typename F>
auto stage(const char* name, F&& f)
{
    try {
        return f();
    } catch (const std::exception& e) {
        throw Error(fmt::format("stage '{}': {}", name, e.what()));
    }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    config.validate();
    if (!config.out_dir.empty()) {
        stage("setup", [&] {
            std::filesystem::create_directories(config.out_dir);
            write_text_file(config.out_dir / "config.txt", config.describe());
            return 0;
        });
    }

    const auto [train_set, test_set] = stage("data", [&] {
        GeneratorOptions gen;
        gen.side = config.raw_side;
        gen.difficulty = config.difficulty;
        const auto raw = generate_dataset(config.seed, config.n_samples, config.class_priors, gen);
        auto [train_part, test_part] = split_dataset(strip_background(raw), config.train_fraction, config.seed);
        TtaOptions aug;
        aug.seed = combine_keys(config.seed, fnv1a("train-views"));
        aug.replicates = config.train_views;
        aug.crop_scale = config.crop_scale;
        return std::make_pair(augmented_views(train_part, config.image_side, aug), std::move(test_part));
    });

    const auto members = stage("train", [&] {
        TrainOptions opt;
        opt.epochs = config.epochs;
        opt.lr = config.lr;
        opt.batch_size = config.batch_size;
        // Members share nothing mutable; each is deterministic in its own seed.
        std::vector<std::future<ToyClassifier>> jobs;
        for (int j = 1; j <= config.models; ++j) {
            jobs.push_back(std::async(std::launch::async, [&, j] {
                return train(std::span<const SyntheticDataset>(train_set), member_seed(config.seed, j), opt);
            }));
        }
        std::vector<ToyClassifier> out;
        for (auto& job : jobs) {
            out.push_back(job.get());
        }
        return out;
    });

    const auto predictions = stage("predict", [&] {
        TtaOptions tta;
        tta.seed = config.seed;
        tta.replicates = config.replicates;
        tta.crop_scale = config.crop_scale;
        return build_ensemble_predictions(members, test_set, tta);
    });

    ExperimentResult result;
    stage("evaluate", [&] {
        const int tta_rows = config.replicates + 1;
        const std::vector<AggregationStrategy> strategies = {
            {StrategyKind::single, 1, 1},
            {StrategyKind::mean_ensemble, 1, std::nullopt},
            {StrategyKind::tta_ensemble, tta_rows, std::nullopt},
            {StrategyKind::ua_ensemble, 1, std::nullopt},
            {StrategyKind::uatta_ens, tta_rows, std::nullopt},
        };
        for (const auto& s : strategies) {
            ReportDocument doc;
            doc.strategy = std::string(strategy_name(s.kind));
            doc.replicates = s.replicates;
            doc.models = s.kind == StrategyKind::single ? 1 : config.models;
            doc.report = full_report(predictions, run_strategy(predictions, s), config.bins);
            result.reports.push_back(std::move(doc));
        }
        for (int j = 1; j <= config.models; ++j) {
            const AggregationStrategy s{StrategyKind::single, 1, j};
            result.member_reports.push_back(full_report(predictions, run_strategy(predictions, s), config.bins));
        }
        result.summary = format_summary(result.reports);
        return 0;
    });

    if (!config.out_dir.empty()) {
        stage("write", [&] {
            write_predictions(predictions, config.out_dir / "predictions.csv");
            for (const auto& doc : result.reports) {
                write_report(doc, config.out_dir / fmt::format("report_{}.txt", doc.strategy));
            }
            write_text_file(config.out_dir / "summary.txt", result.summary);
            return 0;
        });
    }
    return result;
}

}  // namespace uatta
