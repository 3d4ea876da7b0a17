#ifndef UATTA_EXPERIMENT_HPP
#define UATTA_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uatta/io.hpp"
#include "uatta/toymodel.hpp"

namespace uatta {

// Difficulty at which a single member lands in the 0.6-0.8 test-accuracy band.
inline constexpr double kDefaultDifficulty = 0.7;

// A linear pixel model cannot absorb large crops, so the experiment uses milder
// ones than the augmentation module's default range.
inline constexpr CropScale kExperimentCropScale{0.9, 1.0};

struct ExperimentConfig {
    std::uint64_t seed{1};
    std::size_t n_samples{2000};
    std::vector<double> class_priors{default_class_priors()};
    double difficulty{kDefaultDifficulty};
    int models{4};
    int epochs{50};
    double lr{0.01};
    int batch_size{32};
    int replicates{5};  // augmented copies per test image
    int train_views{0};  // augmented copies per train image; 0 trains on originals only
    CropScale crop_scale{kExperimentCropScale};
    int bins{10};
    double train_fraction{0.9};
    int raw_side{40};
    int image_side{32};
    std::filesystem::path out_dir;  // empty: no files written

    // Throws Error naming the first invalid field.
    void validate() const;
    [[nodiscard]] std::string describe() const;
};

struct ExperimentResult {
    std::vector<ReportDocument> reports;  // single, mean, tta, ua, uatta
    std::vector<CalibrationReport> member_reports;  // each member alone, original images
    std::string summary;
};

// Seed of ensemble member j (1-based) for an experiment seed.
std::uint64_t member_seed(std::uint64_t experiment_seed, int member);

// Generate -> preprocess -> split -> train k members -> predict with and without
// TTA -> run the five strategies -> evaluate. Writes config.txt, one report per
// strategy, predictions.csv and summary.txt when out_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace uatta

#endif  // UATTA_EXPERIMENT_HPP
