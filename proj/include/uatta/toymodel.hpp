#ifndef UATTA_TOYMODEL_HPP
#define UATTA_TOYMODEL_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uatta/augment.hpp"
#include "uatta/core.hpp"

namespace uatta {

// Synthetic fundus-like images: a lit disk on a black frame carrying one bright
// lesion per grade step, placed in distinct slots. Difficulty in [0, 1] fades the
// lesions and adds pixel noise.
struct GeneratorOptions {
    int side{40};
    double difficulty{0.0};
};

inline constexpr int kLesionRadius = 4;
inline constexpr int kLesionSlots = 6;

struct SyntheticDataset {
    std::vector<std::string> sample_ids;
    std::vector<RasterImage> images;
    std::vector<GradeLabel> labels;
    std::vector<double> class_priors;

    [[nodiscard]] std::size_t size() const { return images.size(); }
    [[nodiscard]] int num_classes() const { return static_cast<int>(class_priors.size()); }
};

// Default imbalanced priors over the five grades.
std::vector<double> default_class_priors();

// Sample ids are "s00000", "s00001", ... so lexicographic order is index order.
std::string sample_id_for(std::size_t index);

SyntheticDataset generate_dataset(std::uint64_t seed, std::size_t n, std::span<const double> class_priors,
                                  const GeneratorOptions& options = {});

// Black-background removal, then resize to side x side and per-channel normalization.
RasterImage preprocess(const RasterImage& raw, int side);
SyntheticDataset strip_background(const SyntheticDataset& raw, double threshold = kDefaultBlackThreshold);
SyntheticDataset normalize_dataset(const SyntheticDataset& ds, int side);
SyntheticDataset preprocess_dataset(const SyntheticDataset& raw, int side);

// Deterministic split: a seeded permutation, the first round(fraction * n) go to train.
std::pair<SyntheticDataset, SyntheticDataset> split_dataset(const SyntheticDataset& ds, double train_fraction,
                                                            std::uint64_t seed);

// Normalized pixels store 0.5 + z / 4; the model reads z back.
inline double feature_of(float pixel) { return (static_cast<double>(pixel) - 0.5) * 4.0; }

// Linear map from per-pixel features (see feature_of) plus bias to logits, followed
// by softmax. Parameters are stored class-major: class c owns
// params[c * (D + 1) .. c * (D + 1) + D], the last entry being its bias.
struct ToyClassifier {
    int width{0};
    int height{0};
    int num_classes{kPircClasses};
    std::uint64_t seed{0};
    int epochs_trained{0};
    std::vector<double> params;
    std::vector<double> loss_history;  // mean mini-batch loss per epoch

    [[nodiscard]] std::size_t input_dim() const { return static_cast<std::size_t>(width) * height * 3; }
    [[nodiscard]] std::size_t param_count() const { return (input_dim() + 1) * num_classes; }

    friend bool operator==(const ToyClassifier&, const ToyClassifier&) = default;
};

ToyClassifier zero_classifier(int width, int height, int num_classes);

struct TrainOptions {
    int epochs{50};
    double lr{0.01};
    int batch_size{32};
    std::vector<double> class_weights;  // empty: inverse class prior
    double init_scale{0.01};
};

// Rows of centred features with their labels.
struct FeatureBatch {
    std::size_t dim{0};
    std::vector<double> features;  // rows x dim
    std::vector<int> labels;

    [[nodiscard]] std::size_t rows() const { return labels.size(); }
};

FeatureBatch make_features(std::span<const RasterImage> images, std::span<const GradeLabel> labels);

// Class weights proportional to 1 / prior, scaled to average 1.
std::vector<double> inverse_prior_weights(std::span<const double> priors);

// Weighted cross-entropy sum_i w_{y_i} * (-log p_{i, y_i}) / sum_i w_{y_i}.
// Fills `gradient` (size params.size()) when it is non-empty.
double weighted_cross_entropy(std::span<const double> params, int num_classes, const FeatureBatch& batch,
                              std::span<const double> class_weights, std::span<double> gradient = {});

ToyClassifier train(const SyntheticDataset& dataset, std::uint64_t seed, const TrainOptions& options);

// Training over several aligned views of the same samples (same ids and labels).
// Each epoch every sample is drawn from one view chosen by the seed, so members
// with different seeds see different augmentations.
ToyClassifier train(std::span<const SyntheticDataset> views, std::uint64_t seed, const TrainOptions& options);

ProbabilityVector predict(const ToyClassifier& model, const RasterImage& img);

struct TtaOptions {
    std::uint64_t seed{0};
    int replicates{5};
    CropScale crop_scale{};
};

// View 0 is the plain normalized set; views 1..R apply sample_plan keyed by the
// sample id, so the same pool can be shared by every member.
std::vector<SyntheticDataset> augmented_views(const SyntheticDataset& stripped, int side, const TtaOptions& aug);

// `dataset` holds background-stripped images. Replicate 0 is the original and
// replicates 1..R are augmented copies; every view then goes through
// resize_normalize to the members' input side before prediction, so the
// augmentation acts before normalization. Model ids follow the order of
// `models`, starting at 1.
PredictionSet build_ensemble_predictions(std::span<const ToyClassifier> models, const SyntheticDataset& dataset,
                                         std::optional<TtaOptions> tta = std::nullopt);

}  // namespace uatta

#endif  // UATTA_TOYMODEL_HPP
