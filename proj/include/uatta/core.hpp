#ifndef UATTA_CORE_HPP
#define UATTA_CORE_HPP

#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uatta {

// Number of grades on the PIRC diabetic retinopathy scale (0..4).
inline constexpr int kPircClasses = 5;

// Rows whose sum is within this distance of 1 are accepted and renormalized.
inline constexpr double kSimplexTolerance = 1e-9;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GradeLabel {
    int value{0};

    friend auto operator<=>(const GradeLabel&, const GradeLabel&) = default;
};

// Class-probability vector. Construction does not enforce the simplex; use
// simplex_violation() / renormalized() at ingest boundaries.
class ProbabilityVector {
public:
    ProbabilityVector() = default;
    explicit ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {}

    static ProbabilityVector uniform(int num_classes);
    static ProbabilityVector one_hot(int num_classes, int index);

    [[nodiscard]] std::size_t size() const { return probs_.size(); }
    [[nodiscard]] double operator[](std::size_t c) const { return probs_[c]; }
    [[nodiscard]] std::span<const double> values() const { return probs_; }

    [[nodiscard]] double sum() const;
    // Lowest index among the maximal entries.
    [[nodiscard]] int argmax() const;
    // Top-class probability.
    [[nodiscard]] double confidence() const;

    // Empty string when the vector is a valid simplex point within tolerance.
    [[nodiscard]] std::string simplex_violation() const;
    // Divides by the sum; throws if the vector is not within tolerance of the simplex.
    [[nodiscard]] ProbabilityVector renormalized() const;

    friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;

private:
    std::vector<double> probs_;
};

struct PredictionRecord {
    std::string sample_id;
    int model_id{1};      // 1-based
    int replicate_id{0};  // 0 is the unaugmented original
    ProbabilityVector probs;
    GradeLabel label;

    friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

// Records grouped as [sample][model][replicate], samples in sample_id order.
struct PredictionCube {
    std::vector<std::string> sample_ids;
    std::vector<GradeLabel> labels;
    std::vector<std::vector<std::vector<ProbabilityVector>>> probs;
    int num_classes{0};
    int num_models{0};
    int num_replicates{0};

    [[nodiscard]] std::size_t num_samples() const { return sample_ids.size(); }
};

class PredictionSet {
public:
    PredictionSet() = default;
    PredictionSet(std::vector<PredictionRecord> records, int num_classes, int num_models);

    [[nodiscard]] const std::vector<PredictionRecord>& records() const { return records_; }
    [[nodiscard]] int num_classes() const { return num_classes_; }
    [[nodiscard]] int num_models() const { return num_models_; }

    // Records sorted by (sample_id, model_id, replicate_id).
    [[nodiscard]] std::vector<PredictionRecord> sorted_records() const;

    // Copy containing only replicate ids < count.
    [[nodiscard]] PredictionSet restricted_to_replicates(int count) const;

    // Throws Error listing the violations when the set is invalid.
    [[nodiscard]] PredictionCube cube() const;

    friend bool operator==(const PredictionSet&, const PredictionSet&) = default;

private:
    std::vector<PredictionRecord> records_;
    int num_classes_{kPircClasses};
    int num_models_{0};
};

struct ValidationResult {
    std::vector<std::string> violations;

    [[nodiscard]] bool ok() const { return violations.empty(); }
};

ValidationResult validate_prediction_set(const PredictionSet& set);

// Elementwise arithmetic mean. Requires at least one vector of equal length.
ProbabilityVector mean_probabilities(std::span<const ProbabilityVector> vectors);

}  // namespace uatta

#endif  // UATTA_CORE_HPP
