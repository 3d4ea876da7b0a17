// uatta: test-time augmented, uncertainty-weighted ensembles and calibration metrics.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "uatta/augment.hpp"
#include "uatta/ensemble.hpp"
#include "uatta/experiment.hpp"
#include "uatta/image_io.hpp"
#include "uatta/io.hpp"
#include "uatta/metrics.hpp"
#include "uatta/toymodel.hpp"
#include "uatta/uncertainty.hpp"

namespace fs = std::filesystem;
using namespace uatta;

namespace {

struct AugmentArgs {
    fs::path input;
    std::uint64_t seed{0};
    int replicates{5};
    fs::path out;
    std::string sample_id;
    std::string format{"png"};
};

struct TrainArgs {
    ExperimentConfig config;
};

struct PredictArgs {
    std::vector<fs::path> models;
    fs::path data;
    int replicates{5};
    std::uint64_t seed{0};
    fs::path out;
};

struct StrategyArgs {
    fs::path predictions;
    std::string strategy{"uatta"};
    int replicates{0};
    int model{1};
    int bins{kDefaultBins};
    fs::path out;
    fs::path extra_out;
};

struct ReportArgs {
    std::vector<fs::path> reports;
    fs::path out;
};

void cmd_augment(const AugmentArgs& a)
{
    if (a.replicates < 0) {
        throw Error("replicates must be >= 0");
    }
    if (a.format != "png" && a.format != "ppm") {
        throw Error(fmt::format("unknown image format '{}'", a.format));
    }
    const auto img = read_image(a.input);
    const std::string id = a.sample_id.empty() ? a.input.stem().string() : a.sample_id;
    fs::create_directories(a.out);
    std::vector<AugmentationPlan> plans;
    for (int r = 1; r <= a.replicates; ++r) {
        plans.push_back(sample_plan(a.seed, id, r, img.width, img.height));
        write_image(apply_plan(img, plans.back()), a.out / fmt::format("{}_r{}.{}", id, r, a.format));
    }
    write_plans(plans, a.out / "plans.csv");
    fmt::print(stderr, "augment: wrote {} images and plans.csv to {}\n", a.replicates, a.out.string());
}

void cmd_train_toy(const TrainArgs& a)
{
    const auto& c = a.config;
    c.validate();
    if (c.out_dir.empty()) {
        throw Error("--out is required");
    }
    fs::create_directories(c.out_dir);
    write_text_file(c.out_dir / "config.txt", c.describe());
    GeneratorOptions gen;
    gen.side = c.raw_side;
    gen.difficulty = c.difficulty;
    const auto raw = generate_dataset(c.seed, c.n_samples, c.class_priors, gen);
    auto [train_part, test_set] = split_dataset(strip_background(raw), c.train_fraction, c.seed);
    const auto train_set = normalize_dataset(train_part, c.image_side);
    write_dataset(test_set, c.out_dir / "test");
    TrainOptions opt;
    opt.epochs = c.epochs;
    opt.lr = c.lr;
    opt.batch_size = c.batch_size;
    for (int j = 1; j <= c.models; ++j) {
        const auto model = train(train_set, member_seed(c.seed, j), opt);
        write_model(model, c.out_dir / fmt::format("model_{}.bin", j));
        fmt::print(stderr, "train-toy: member {} final loss {:.4f}\n", j, model.loss_history.back());
    }
}

void cmd_predict(const PredictArgs& a)
{
    if (a.models.empty()) {
        throw Error("at least one --model is required");
    }
    std::vector<ToyClassifier> models;
    for (const auto& p : a.models) {
        models.push_back(read_model(p));
    }
    const auto data = read_dataset(a.data);
    std::optional<TtaOptions> tta;
    if (a.replicates > 0) {
        tta = TtaOptions{a.seed, a.replicates, {}};
    }
    write_predictions(build_ensemble_predictions(models, data, tta), a.out);
}

AggregationStrategy resolve_strategy(const StrategyArgs& a, const PredictionSet& set)
{
    AggregationStrategy s;
    s.kind = parse_strategy(a.strategy);
    if (s.kind == StrategyKind::single) {
        s.model_index = a.model;
    }
    const int available = set.cube().num_replicates;
    if (s.uses_tta()) {
        if (available < 2) {
            throw Error(fmt::format("strategy '{}' needs augmented replicates but '{}' holds only originals",
                                    a.strategy, a.predictions.string()));
        }
        s.replicates = a.replicates == 0 ? available : a.replicates;
    } else {
        s.replicates = a.replicates == 0 ? 1 : a.replicates;
    }
    return s;
}

void cmd_ensemble(const StrategyArgs& a)
{
    const auto set = read_predictions(a.predictions);
    const auto strategy = resolve_strategy(a, set);
    const auto forecasts = run_strategy(set, strategy);
    const auto cube = set.cube();
    write_forecasts(cube.sample_ids, forecasts, cube.labels, a.out);
    if (!a.extra_out.empty()) {
        if (strategy.kind != StrategyKind::ua_ensemble && strategy.kind != StrategyKind::uatta_ens) {
            throw Error("--uncertainty-out needs strategy ua or uatta");
        }
        write_uncertainty_table(build_uncertainty_table(set.restricted_to_replicates(strategy.replicates)),
                                a.extra_out);
    }
}

void cmd_evaluate(const StrategyArgs& a)
{
    const auto set = read_predictions(a.predictions);
    const auto strategy = resolve_strategy(a, set);
    ReportDocument doc;
    doc.strategy = std::string(strategy_name(strategy.kind));
    doc.replicates = strategy.replicates;
    doc.models = strategy.kind == StrategyKind::single ? 1 : set.num_models();
    doc.report = full_report(set, run_strategy(set, strategy), a.bins);
    write_report(doc, a.out);
    if (!a.extra_out.empty()) {
        write_bins(doc.report.bins, a.extra_out);
    }
    fmt::print("{}", format_summary(std::span(&doc, 1)));
}

void cmd_report(const ReportArgs& a)
{
    std::vector<ReportDocument> docs;
    for (const auto& p : a.reports) {
        if (fs::is_directory(p)) {
            for (auto name : {"single", "mean", "tta", "ua", "uatta"}) {
                const auto f = p / fmt::format("report_{}.txt", name);
                if (fs::exists(f)) {
                    docs.push_back(read_report(f));
                }
            }
        } else {
            docs.push_back(read_report(p));
        }
    }
    if (docs.empty()) {
        throw Error("no report files found");
    }
    const auto table = format_summary(docs);
    if (a.out.empty()) {
        fmt::print("{}", table);
    } else {
        write_text_file(a.out, table);
    }
}

void add_experiment_flags(CLI::App* cmd, ExperimentConfig& c)
{
    cmd->add_option("--seed", c.seed, "Experiment seed")->capture_default_str();
    cmd->add_option("--samples", c.n_samples, "Synthetic dataset size")->capture_default_str();
    cmd->add_option("--priors", c.class_priors, "Class priors (one per grade)")->capture_default_str()->delimiter(',');
    cmd->add_option("--difficulty", c.difficulty, "Lesion fade and pixel noise in [0, 1]")->capture_default_str();
    cmd->add_option("--models,-k", c.models, "Ensemble members k")->capture_default_str();
    cmd->add_option("--epochs", c.epochs, "SGD epochs per member")->capture_default_str();
    cmd->add_option("--lr", c.lr, "SGD learning rate")->capture_default_str();
    cmd->add_option("--batch", c.batch_size, "Mini-batch size")->capture_default_str();
    cmd->add_option("--train-fraction", c.train_fraction, "Share of samples used for training")
        ->capture_default_str();
    cmd->add_option("--side", c.image_side, "Preprocessed image side")->capture_default_str();
    cmd->add_option("--out", c.out_dir, "Output directory")->required();
}

void add_strategy_flags(CLI::App* cmd, StrategyArgs& a, bool with_bins)
{
    cmd->add_option("--predictions", a.predictions, "Prediction CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--strategy", a.strategy, "single, mean, tta, ua or uatta")
        ->capture_default_str()
        ->check(CLI::IsMember({"single", "mean", "tta", "ua", "uatta"}));
    cmd->add_option("--replicates,-R", a.replicates,
                    "Replicate rows aggregated per (sample, model), ids 0..R-1; 0 = all for tta/uatta, 1 otherwise")
        ->capture_default_str();
    cmd->add_option("--model", a.model, "Member used by the single strategy (1-based)")->capture_default_str();
    if (with_bins) {
        cmd->add_option("--bins,-M", a.bins, "Equal-width confidence bins")->capture_default_str();
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"uatta: uncertainty-aware test-time augmented ensembles and calibration metrics"};
    app.require_subcommand(1);

    AugmentArgs augment_args;
    auto* augment = app.add_subcommand("augment", "Write R augmented copies of an image plus the plan audit CSV");
    augment->add_option("--input", augment_args.input, "PNG or P6 PPM image")->required()->check(CLI::ExistingFile);
    augment->add_option("--seed", augment_args.seed, "Augmentation seed")->capture_default_str();
    augment->add_option("--replicates,-R", augment_args.replicates, "Augmented copies")->capture_default_str();
    augment->add_option("--sample-id", augment_args.sample_id, "Sample id keying the plans (default: file stem)");
    augment->add_option("--format", augment_args.format, "png or ppm")->capture_default_str();
    augment->add_option("--out", augment_args.out, "Output directory")->required();

    TrainArgs train_args;
    auto* train_toy = app.add_subcommand("train-toy", "Generate synthetic data and train k toy members");
    add_experiment_flags(train_toy, train_args.config);

    PredictArgs predict_args;
    auto* predict_cmd = app.add_subcommand("predict", "Predict a dataset directory with trained members");
    predict_cmd->add_option("--model", predict_args.models, "Model file (repeat per member)")
        ->required()
        ->check(CLI::ExistingFile);
    predict_cmd->add_option("--data", predict_args.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    predict_cmd->add_option("--replicates,-R", predict_args.replicates, "Augmented copies per image (0 = no TTA)")
        ->capture_default_str();
    predict_cmd->add_option("--seed", predict_args.seed, "Augmentation seed")->capture_default_str();
    predict_cmd->add_option("--out", predict_args.out, "Prediction CSV")->required();

    StrategyArgs ensemble_args;
    auto* ensemble = app.add_subcommand("ensemble", "Aggregate a prediction file with one strategy");
    add_strategy_flags(ensemble, ensemble_args, false);
    ensemble->add_option("--out", ensemble_args.out, "Aggregated forecast CSV")->required();
    ensemble->add_option("--uncertainty-out", ensemble_args.extra_out, "Uncertainty table CSV (ua, uatta)");

    StrategyArgs evaluate_args;
    auto* evaluate = app.add_subcommand("evaluate", "Aggregate and score a prediction file");
    add_strategy_flags(evaluate, evaluate_args, true);
    evaluate->add_option("--out", evaluate_args.out, "Report file")->required();
    evaluate->add_option("--bins-out", evaluate_args.extra_out, "Reliability bins CSV");

    ExperimentConfig experiment_config;
    auto* experiment = app.add_subcommand("experiment", "Run the five-strategy comparison on synthetic data");
    add_experiment_flags(experiment, experiment_config);
    experiment->add_option("--replicates,-R", experiment_config.replicates, "Augmented copies per test image")
        ->capture_default_str();
    experiment->add_option("--bins,-M", experiment_config.bins, "Equal-width confidence bins")->capture_default_str();
    experiment->add_option("--crop-min", experiment_config.crop_scale.lo, "Smallest crop side fraction")
        ->capture_default_str();
    experiment->add_option("--crop-max", experiment_config.crop_scale.hi, "Largest crop side fraction")
        ->capture_default_str();
    experiment->add_option("--train-views", experiment_config.train_views,
                           "Augmented training views per image (0 = train on originals only)")
        ->capture_default_str();

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Tabulate report files or experiment directories");
    report->add_option("inputs", report_args.reports, "Report files or experiment directories")
        ->required()
        ->check(CLI::ExistingPath);
    report->add_option("--out", report_args.out, "Write the table here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    const char* stage_name = app.get_subcommands().front()->get_name().c_str();
    try {
        if (*augment) cmd_augment(augment_args);
        if (*train_toy) cmd_train_toy(train_args);
        if (*predict_cmd) cmd_predict(predict_args);
        if (*ensemble) cmd_ensemble(ensemble_args);
        if (*evaluate) cmd_evaluate(evaluate_args);
        if (*experiment) {
            const auto result = run_experiment(experiment_config);
            fmt::print("{}", result.summary);
        }
        if (*report) cmd_report(report_args);
    } catch (const std::exception& e) {
        fmt::print(stderr, "uatta {}: error: {}\n", stage_name, e.what());
        return 1;
    }
    return 0;
}
