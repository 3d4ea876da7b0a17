#include "uatta/toymodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "uatta/random.hpp"

namespace uatta {

namespace {

// Both colours stay inside [0.32, 0.68] per channel so brightness then contrast
// jitter cannot clamp them, and the lesion is brighter in every channel.
constexpr double kDiskColor[3] = {0.55, 0.4, 0.35};
constexpr double kLesionColor[3] = {0.72, 0.68, 0.6};

struct Slot {
    double x;
    double y;
};

// Mirror-symmetric about the image centre, so flips map slots onto slots.
std::vector<Slot> lesion_slots(int side)
{
    const double centre = (side - 1) / 2.0;
    std::vector<Slot> slots;
    for (double fy : {-0.24, 0.0, 0.24}) {
        for (double fx : {-0.12, 0.12}) {
            slots.push_back({centre + fx * side, centre + fy * side});
        }
    }
    return slots;
}

void check_priors(std::span<const double> priors)
{
    if (priors.empty()) {
        throw Error("class priors are empty");
    }
    double s = 0.0;
    for (double p : priors) {
        if (!(p >= 0.0)) {
            throw Error("class priors must be non-negative");
        }
        s += p;
    }
    if (std::abs(s - 1.0) > kSimplexTolerance) {
        throw Error(fmt::format("class priors sum to {}, expected 1", s));
    }
}

int draw_class(KeyedStream& rng, std::span<const double> priors)
{
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t c = 0; c < priors.size(); ++c) {
        acc += priors[c];
        if (u < acc) {
            return static_cast<int>(c);
        }
    }
    return static_cast<int>(priors.size()) - 1;
}

RasterImage render_sample(KeyedStream& rng, int grade, const GeneratorOptions& opt)
{
    const int side = opt.side;
    RasterImage img(side, side, 0.0F);
    const double centre = (side - 1) / 2.0;
    const double radius = 0.45 * side;

    auto slots = lesion_slots(side);
    // Partial Fisher-Yates picks `grade` distinct slots.
    for (int i = 0; i < grade; ++i) {
        const auto j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(slots.size() - i)));
        std::swap(slots[i], slots[j]);
    }
    std::vector<double> strength(grade);
    for (int i = 0; i < grade; ++i) {
        strength[i] = 1.0 - 0.7 * opt.difficulty * rng.uniform01();
    }
    const double noise_sd = 0.4 * opt.difficulty;

    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double dx = x - centre, dy = y - centre;
            const double r2 = (dx * dx + dy * dy) / (radius * radius);
            if (r2 > 1.0) {
                continue;
            }
            double rgb[3];
            for (int c = 0; c < 3; ++c) {
                rgb[c] = kDiskColor[c] * (1.0 - 0.1 * r2);
            }
            for (int i = 0; i < grade; ++i) {
                const double lx = x - slots[i].x, ly = y - slots[i].y;
                if (lx * lx + ly * ly <= kLesionRadius * kLesionRadius) {
                    for (int c = 0; c < 3; ++c) {
                        rgb[c] += strength[i] * (kLesionColor[c] - rgb[c]);
                    }
                }
            }
            for (int c = 0; c < 3; ++c) {
                const double noise = noise_sd > 0.0 ? noise_sd * rng.normal() : 0.0;
                img.at(x, y, c) = static_cast<float>(std::clamp(rgb[c] + noise, 0.0, 1.0));
            }
            // Keep the disk distinguishable from the black frame.
            if (std::max({img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)}) <= kDefaultBlackThreshold) {
                img.at(x, y, 0) = static_cast<float>(2.0 * kDefaultBlackThreshold);
            }
        }
    }
    return img;
}

}  // namespace

std::vector<double> default_class_priors()
{
    return {0.5, 0.2, 0.15, 0.1, 0.05};
}

std::string sample_id_for(std::size_t index)
{
    return fmt::format("s{:05d}", index);
}

SyntheticDataset generate_dataset(std::uint64_t seed, std::size_t n, std::span<const double> class_priors,
                                  const GeneratorOptions& options)
{
    if (n < 1) {
        throw Error("dataset size must be >= 1");
    }
    if (!(options.difficulty >= 0.0 && options.difficulty <= 1.0)) {
        throw Error(fmt::format("difficulty {} outside [0, 1]", options.difficulty));
    }
    if (options.side < 16) {
        throw Error(fmt::format("image side {} too small (minimum 16)", options.side));
    }
    check_priors(class_priors);
    if (static_cast<int>(class_priors.size()) > kLesionSlots + 1) {
        throw Error(fmt::format("generator supports at most {} classes", kLesionSlots + 1));
    }

    SyntheticDataset ds;
    ds.class_priors.assign(class_priors.begin(), class_priors.end());
    ds.sample_ids.reserve(n);
    ds.images.reserve(n);
    ds.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        KeyedStream rng(seed, "synthetic-sample", i);
        const int grade = draw_class(rng, class_priors);
        ds.sample_ids.push_back(sample_id_for(i));
        ds.labels.push_back(GradeLabel{grade});
        ds.images.push_back(render_sample(rng, grade, options));
    }
    return ds;
}

RasterImage preprocess(const RasterImage& raw, int side)
{
    return resize_normalize(remove_black_background(raw), side);
}

SyntheticDataset strip_background(const SyntheticDataset& raw, double threshold)
{
    SyntheticDataset out = raw;
    for (auto& img : out.images) {
        img = remove_black_background(img, threshold);
    }
    return out;
}

SyntheticDataset normalize_dataset(const SyntheticDataset& ds, int side)
{
    SyntheticDataset out = ds;
    for (auto& img : out.images) {
        img = resize_normalize(img, side);
    }
    return out;
}

SyntheticDataset preprocess_dataset(const SyntheticDataset& raw, int side)
{
    return normalize_dataset(strip_background(raw), side);
}

std::pair<SyntheticDataset, SyntheticDataset> split_dataset(const SyntheticDataset& ds, double train_fraction,
                                                            std::uint64_t seed)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(fmt::format("train fraction {} outside (0, 1)", train_fraction));
    }
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    KeyedStream rng(seed, "split", 0);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(ds.size())));
    if (n_train == 0 || n_train == ds.size()) {
        throw Error("split leaves one side empty");
    }
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

    auto take = [&](std::size_t from, std::size_t to) {
        SyntheticDataset part;
        part.class_priors = ds.class_priors;
        for (std::size_t i = from; i < to; ++i) {
            part.sample_ids.push_back(ds.sample_ids[order[i]]);
            part.images.push_back(ds.images[order[i]]);
            part.labels.push_back(ds.labels[order[i]]);
        }
        return part;
    };
    return {take(0, n_train), take(n_train, order.size())};
}

ToyClassifier zero_classifier(int width, int height, int num_classes)
{
    ToyClassifier m;
    m.width = width;
    m.height = height;
    m.num_classes = num_classes;
    m.params.assign(m.param_count(), 0.0);
    return m;
}

FeatureBatch make_features(std::span<const RasterImage> images, std::span<const GradeLabel> labels)
{
    if (images.size() != labels.size()) {
        throw Error("images and labels differ in length");
    }
    FeatureBatch batch;
    if (images.empty()) {
        return batch;
    }
    batch.dim = images.front().pixels.size();
    batch.features.reserve(images.size() * batch.dim);
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].pixels.size() != batch.dim) {
            throw Error(fmt::format("image {} has different dimensions", i));
        }
        for (float v : images[i].pixels) {
            batch.features.push_back(feature_of(v));
        }
        batch.labels.push_back(labels[i].value);
    }
    return batch;
}

std::vector<double> inverse_prior_weights(std::span<const double> priors)
{
    std::vector<double> w(priors.size());
    double total = 0.0;
    for (std::size_t c = 0; c < priors.size(); ++c) {
        if (!(priors[c] > 0.0)) {
            throw Error(fmt::format("class {} has zero prior; cannot invert", c));
        }
        w[c] = 1.0 / priors[c];
        total += w[c];
    }
    for (double& v : w) {
        v *= static_cast<double>(priors.size()) / total;
    }
    return w;
}

namespace {

// logits[c] = W_c . x + b_c
void compute_logits(std::span<const double> params, int num_classes, std::span<const double> x,
                    std::span<double> logits)
{
    const std::size_t stride = x.size() + 1;
    for (int c = 0; c < num_classes; ++c) {
        const double* w = params.data() + c * stride;
        double z = w[x.size()];
        for (std::size_t d = 0; d < x.size(); ++d) {
            z += w[d] * x[d];
        }
        logits[c] = z;
    }
}

// In-place softmax; returns log-sum-exp of the input.
double softmax_inplace(std::span<double> z)
{
    const double hi = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - hi);
        s += v;
    }
    for (double& v : z) {
        v /= s;
    }
    return hi + std::log(s);
}

}  // namespace

double weighted_cross_entropy(std::span<const double> params, int num_classes, const FeatureBatch& batch,
                              std::span<const double> class_weights, std::span<double> gradient)
{
    const std::size_t dim = batch.dim;
    const std::size_t stride = dim + 1;
    if (params.size() != stride * num_classes) {
        throw Error(fmt::format("{} parameters, expected {}", params.size(), stride * num_classes));
    }
    if (static_cast<int>(class_weights.size()) != num_classes) {
        throw Error("class weight count differs from class count");
    }
    if (batch.rows() == 0) {
        throw Error("loss over an empty batch");
    }
    const bool want_grad = !gradient.empty();
    if (want_grad) {
        if (gradient.size() != params.size()) {
            throw Error("gradient buffer has the wrong size");
        }
        std::fill(gradient.begin(), gradient.end(), 0.0);
    }

    std::vector<double> z(num_classes);
    double loss = 0.0;
    double weight_total = 0.0;
    for (std::size_t i = 0; i < batch.rows(); ++i) {
        const std::span<const double> x(batch.features.data() + i * dim, dim);
        const int y = batch.labels[i];
        compute_logits(params, num_classes, x, z);
        const double true_logit = z[y];
        const double lse = softmax_inplace(z);
        const double w = class_weights[y];
        loss += w * (lse - true_logit);
        weight_total += w;
        if (want_grad) {
            for (int c = 0; c < num_classes; ++c) {
                const double g = w * (z[c] - (c == y ? 1.0 : 0.0));
                double* gc = gradient.data() + c * stride;
                for (std::size_t d = 0; d < dim; ++d) {
                    gc[d] += g * x[d];
                }
                gc[dim] += g;
            }
        }
    }
    if (want_grad) {
        for (double& g : gradient) {
            g /= weight_total;
        }
    }
    return loss / weight_total;
}

ToyClassifier train(const SyntheticDataset& dataset, std::uint64_t seed, const TrainOptions& options)
{
    return train(std::span<const SyntheticDataset>(&dataset, 1), seed, options);
}

ToyClassifier train(std::span<const SyntheticDataset> views, std::uint64_t seed, const TrainOptions& options)
{
    if (options.epochs < 1) {
        throw Error("epochs must be >= 1");
    }
    if (!(options.lr > 0.0)) {
        throw Error("learning rate must be > 0");
    }
    if (options.batch_size < 1) {
        throw Error("batch size must be >= 1");
    }
    if (views.empty() || views.front().size() == 0) {
        throw Error("training set is empty");
    }
    const SyntheticDataset& dataset = views.front();
    const std::size_t n = dataset.size();
    const auto& first = dataset.images.front();
    const std::size_t dim = first.pixels.size();
    for (const auto& v : views) {
        if (v.size() != n || v.labels != dataset.labels) {
            throw Error("training views must share samples and labels");
        }
        for (const auto& img : v.images) {
            if (img.width != first.width || img.height != first.height) {
                throw Error("training images differ in dimensions");
            }
        }
    }
    const int classes = dataset.num_classes();
    std::vector<double> weights =
        options.class_weights.empty() ? inverse_prior_weights(dataset.class_priors) : options.class_weights;
    if (static_cast<int>(weights.size()) != classes) {
        throw Error(fmt::format("{} class weights for {} classes", weights.size(), classes));
    }
    for (double w : weights) {
        if (!(w > 0.0)) {
            throw Error("class weights must be > 0");
        }
    }

    ToyClassifier model = zero_classifier(first.width, first.height, classes);
    model.seed = seed;
    KeyedStream init(seed, "init", 0);
    for (double& p : model.params) {
        p = options.init_scale * init.normal();
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(model.params.size());
    FeatureBatch mb;
    mb.dim = dim;

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        KeyedStream shuffle(seed, "shuffle", static_cast<std::uint64_t>(epoch));
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[shuffle.uniform_index(i)]);
        }
        // With a single view no draws are made, so plain training is unaffected.
        KeyedStream pick(seed, "view", static_cast<std::uint64_t>(epoch));
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < n; start += options.batch_size) {
            const std::size_t stop = std::min(n, start + options.batch_size);
            mb.features.clear();
            mb.labels.clear();
            for (std::size_t i = start; i < stop; ++i) {
                const std::size_t v = views.size() > 1 ? pick.uniform_index(views.size()) : 0;
                for (float px : views[v].images[order[i]].pixels) {
                    mb.features.push_back(feature_of(px));
                }
                mb.labels.push_back(dataset.labels[order[i]].value);
            }
            epoch_loss += weighted_cross_entropy(model.params, classes, mb, weights, grad);
            ++batches;
            for (std::size_t p = 0; p < grad.size(); ++p) {
                model.params[p] -= options.lr * grad[p];
            }
        }
        model.loss_history.push_back(epoch_loss / batches);
        ++model.epochs_trained;
    }
    return model;
}

std::vector<SyntheticDataset> augmented_views(const SyntheticDataset& stripped, int side, const TtaOptions& aug)
{
    if (aug.replicates < 0) {
        throw Error("view count must be >= 0");
    }
    std::vector<SyntheticDataset> out;
    for (int r = 0; r <= aug.replicates; ++r) {
        SyntheticDataset v = stripped;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto& img = stripped.images[i];
            const auto plan = sample_plan(aug.seed, stripped.sample_ids[i], r, img.width, img.height, aug.crop_scale);
            v.images[i] = resize_normalize(apply_plan(img, plan), side);
        }
        out.push_back(std::move(v));
    }
    return out;
}

ProbabilityVector predict(const ToyClassifier& model, const RasterImage& img)
{
    if (img.width != model.width || img.height != model.height) {
        throw Error(fmt::format("image is {}x{} but the model expects {}x{}", img.width, img.height, model.width,
                                model.height));
    }
    if (model.params.size() != model.param_count()) {
        throw Error("model parameter vector has the wrong size");
    }
    std::vector<double> x(img.pixels.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
        x[d] = feature_of(img.pixels[d]);
    }
    std::vector<double> z(model.num_classes);
    compute_logits(model.params, model.num_classes, x, z);
    softmax_inplace(z);
    return ProbabilityVector(std::move(z));
}

PredictionSet build_ensemble_predictions(std::span<const ToyClassifier> models, const SyntheticDataset& dataset,
                                         std::optional<TtaOptions> tta)
{
    if (models.empty()) {
        throw Error("ensemble needs at least one model");
    }
    if (tta && tta->replicates < 0) {
        throw Error("replicate count must be >= 0");
    }
    const int classes = models.front().num_classes;
    const int side = models.front().width;
    for (const auto& m : models) {
        if (m.width != side || m.height != side || m.num_classes != classes) {
            throw Error("ensemble members must share square input dimensions and class count");
        }
    }
    const int replicates = tta ? tta->replicates : 0;
    std::vector<PredictionRecord> records;
    records.reserve(dataset.size() * models.size() * (replicates + 1));

    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& img = dataset.images[i];
        std::vector<RasterImage> views{img};
        for (int r = 1; r <= replicates; ++r) {
            const auto plan = sample_plan(tta->seed, dataset.sample_ids[i], r, img.width, img.height, tta->crop_scale);
            views.push_back(apply_plan(img, plan));
        }
        for (auto& v : views) {
            v = resize_normalize(v, side);
        }
        for (std::size_t m = 0; m < models.size(); ++m) {
            for (std::size_t r = 0; r < views.size(); ++r) {
                records.push_back(PredictionRecord{dataset.sample_ids[i], static_cast<int>(m) + 1,
                                                   static_cast<int>(r), predict(models[m], views[r]),
                                                   dataset.labels[i]});
            }
        }
    }
    return PredictionSet(std::move(records), classes, static_cast<int>(models.size()));
}

}  // namespace uatta
