#include "uatta/core.hpp"
#include "uatta/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <tuple>

#include <fmt/format.h>

namespace uatta {

double KeyedStream::uniform_open(double lo, double hi)
{
    for (;;) {
        const double v = lo + (hi - lo) * uniform01();
        if (v > lo && v < hi) {
            return v;
        }
    }
}

std::uint64_t KeyedStream::uniform_index(std::uint64_t bound)
{
    // Reject the top partial block so the modulo is unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        const std::uint64_t x = next_u64();
        if (x < limit) {
            return x % bound;
        }
    }
}

double KeyedStream::normal()
{
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ProbabilityVector ProbabilityVector::uniform(int num_classes)
{
    return ProbabilityVector(std::vector<double>(num_classes, 1.0 / num_classes));
}

ProbabilityVector ProbabilityVector::one_hot(int num_classes, int index)
{
    std::vector<double> p(num_classes, 0.0);
    p.at(index) = 1.0;
    return ProbabilityVector(std::move(p));
}

double ProbabilityVector::sum() const
{
    double s = 0.0;
    for (double p : probs_) {
        s += p;
    }
    return s;
}

int ProbabilityVector::argmax() const
{
    int best = 0;
    for (std::size_t c = 1; c < probs_.size(); ++c) {
        if (probs_[c] > probs_[best]) {
            best = static_cast<int>(c);
        }
    }
    return best;
}

double ProbabilityVector::confidence() const
{
    return probs_.empty() ? 0.0 : probs_[argmax()];
}

std::string ProbabilityVector::simplex_violation() const
{
    if (probs_.empty()) {
        return "empty probability vector";
    }
    for (std::size_t c = 0; c < probs_.size(); ++c) {
        if (!std::isfinite(probs_[c]) || probs_[c] < 0.0 || probs_[c] > 1.0) {
            return fmt::format("probability p{} = {} outside [0, 1]", c, probs_[c]);
        }
    }
    const double s = sum();
    if (std::abs(s - 1.0) > kSimplexTolerance) {
        return fmt::format("simplex sum = {}", s);
    }
    return {};
}

ProbabilityVector ProbabilityVector::renormalized() const
{
    if (auto why = simplex_violation(); !why.empty()) {
        throw Error(why);
    }
    const double s = sum();
    // Within summation rounding of 1 the vector is already normalized; dividing
    // would only perturb the last bits and break exact round-trips.
    if (std::abs(s - 1.0) <= 4.0 * static_cast<double>(probs_.size()) * std::numeric_limits<double>::epsilon()) {
        return *this;
    }
    std::vector<double> p(probs_);
    for (double& v : p) {
        v /= s;
    }
    return ProbabilityVector(std::move(p));
}

PredictionSet::PredictionSet(std::vector<PredictionRecord> records, int num_classes, int num_models)
    : records_(std::move(records)), num_classes_(num_classes), num_models_(num_models)
{
}

namespace {

bool record_less(const PredictionRecord& a, const PredictionRecord& b)
{
    return std::tie(a.sample_id, a.model_id, a.replicate_id) <
           std::tie(b.sample_id, b.model_id, b.replicate_id);
}

}  // namespace

std::vector<PredictionRecord> PredictionSet::sorted_records() const
{
    auto out = records_;
    std::sort(out.begin(), out.end(), record_less);
    return out;
}

PredictionSet PredictionSet::restricted_to_replicates(int count) const
{
    std::vector<PredictionRecord> kept;
    for (const auto& r : records_) {
        if (r.replicate_id < count) {
            kept.push_back(r);
        }
    }
    return PredictionSet(std::move(kept), num_classes_, num_models_);
}

ValidationResult validate_prediction_set(const PredictionSet& set)
{
    ValidationResult result;
    auto& out = result.violations;
    const int classes = set.num_classes();
    const int models = set.num_models();

    if (classes < 1) {
        out.push_back(fmt::format("num_classes = {} must be >= 1", classes));
    }
    if (models < 1) {
        out.push_back(fmt::format("num_models = {} must be >= 1", models));
    }
    if (set.records().empty()) {
        out.push_back("no samples");
        return result;
    }

    std::set<std::tuple<std::string, int, int>> keys;
    std::map<std::string, int> sample_label;
    std::map<std::pair<std::string, int>, std::set<int>> replicates;

    for (const auto& r : set.records()) {
        const auto where = fmt::format("({}, model {}, replicate {})", r.sample_id, r.model_id, r.replicate_id);
        if (r.sample_id.empty()) {
            out.push_back(fmt::format("{}: empty sample_id", where));
        }
        if (r.model_id < 1 || r.model_id > models) {
            out.push_back(fmt::format("{}: model_id outside [1, {}]", where, models));
        }
        if (r.replicate_id < 0) {
            out.push_back(fmt::format("{}: negative replicate_id", where));
        }
        if (static_cast<int>(r.probs.size()) != classes) {
            out.push_back(fmt::format("{}: {} probabilities, expected {}", where, r.probs.size(), classes));
        } else if (auto why = r.probs.simplex_violation(); !why.empty()) {
            out.push_back(fmt::format("{}: {}", where, why));
        }
        if (r.label.value < 0 || r.label.value >= classes) {
            out.push_back(fmt::format("{}: label {} outside [0, {}]", where, r.label.value, classes - 1));
        }
        if (!keys.emplace(r.sample_id, r.model_id, r.replicate_id).second) {
            out.push_back(fmt::format("{}: duplicate key", where));
        }
        auto [it, inserted] = sample_label.emplace(r.sample_id, r.label.value);
        if (!inserted && it->second != r.label.value) {
            out.push_back(fmt::format("sample {}: label conflict ({} vs {})", r.sample_id, it->second, r.label.value));
        }
        replicates[{r.sample_id, r.model_id}].insert(r.replicate_id);
    }

    std::size_t expected_replicates = replicates.begin()->second.size();
    for (const auto& [sample, label] : sample_label) {
        for (int m = 1; m <= models; ++m) {
            auto it = replicates.find({sample, m});
            if (it == replicates.end()) {
                out.push_back(fmt::format("sample {}: missing model {}", sample, m));
                continue;
            }
            const auto& ids = it->second;
            if (ids.size() != expected_replicates) {
                out.push_back(fmt::format("sample {} model {}: ragged replicates ({} vs {})", sample, m, ids.size(),
                                          expected_replicates));
            } else if (*ids.begin() != 0 || *ids.rbegin() != static_cast<int>(ids.size()) - 1) {
                out.push_back(fmt::format("sample {} model {}: replicate ids are not 0..{}", sample, m, ids.size() - 1));
            }
        }
    }
    return result;
}

PredictionCube PredictionSet::cube() const
{
    if (auto v = validate_prediction_set(*this); !v.ok()) {
        std::string msg = "invalid prediction set:";
        for (const auto& s : v.violations) {
            msg += "\n  " + s;
        }
        throw Error(msg);
    }
    PredictionCube cube;
    cube.num_classes = num_classes_;
    cube.num_models = num_models_;

    const auto sorted = sorted_records();
    for (const auto& r : sorted) {
        if (cube.sample_ids.empty() || cube.sample_ids.back() != r.sample_id) {
            cube.sample_ids.push_back(r.sample_id);
            cube.labels.push_back(r.label);
            cube.probs.emplace_back(num_models_);
        }
        cube.probs.back()[r.model_id - 1].push_back(r.probs);
    }
    cube.num_replicates = static_cast<int>(cube.probs.front().front().size());
    return cube;
}

ProbabilityVector mean_probabilities(std::span<const ProbabilityVector> vectors)
{
    if (vectors.empty()) {
        throw Error("mean of zero probability vectors");
    }
    const std::size_t classes = vectors.front().size();
    std::vector<double> acc(classes, 0.0);
    for (const auto& v : vectors) {
        if (v.size() != classes) {
            throw Error("probability vectors of unequal length");
        }
        for (std::size_t c = 0; c < classes; ++c) {
            acc[c] += v[c];
        }
    }
    for (double& a : acc) {
        a /= static_cast<double>(vectors.size());
    }
    return ProbabilityVector(std::move(acc));
}

}  // namespace uatta
