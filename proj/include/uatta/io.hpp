#ifndef UATTA_IO_HPP
#define UATTA_IO_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "uatta/augment.hpp"
#include "uatta/core.hpp"
#include "uatta/metrics.hpp"
#include "uatta/toymodel.hpp"
#include "uatta/uncertainty.hpp"

namespace uatta {

namespace fs = std::filesystem;

// Header: sample_id,model_id,replicate_id,p0,...,p{C-1},label.
// Rows are written sorted by (sample_id, model_id, replicate_id) with
// probabilities at 17 significant digits.
void write_predictions(const PredictionSet& set, const fs::path& path);
std::string format_predictions(const PredictionSet& set);

// C comes from the header, k from the largest model_id. Rows within the simplex
// tolerance are renormalized. Errors name the 1-based line number.
PredictionSet read_predictions(const fs::path& path);
PredictionSet parse_predictions(const std::string& text, const std::string& source = "<memory>");

// Columns: sample_id,p0,...,p{C-1},label.
void write_forecasts(std::span<const std::string> sample_ids, std::span<const ProbabilityVector> forecasts,
                     std::span<const GradeLabel> labels, const fs::path& path);

// Columns: sample_id,model_id,sigma,weight,mu,var.
void write_uncertainty_table(const UncertaintyTable& table, const fs::path& path);

// Columns: bin_index,lower,upper,count,accuracy,confidence.
std::string format_bins(std::span<const BinStat> bins);
void write_bins(std::span<const BinStat> bins, const fs::path& path);

// Columns: seed,sample_id,replicate_id,b,s,h,c,crop_x,crop_y,crop_w,crop_h,hflip,vflip.
std::string format_plans(std::span<const AugmentationPlan> plans);
void write_plans(std::span<const AugmentationPlan> plans, const fs::path& path);

struct ReportDocument {
    std::string strategy;
    int replicates{1};
    int models{0};
    CalibrationReport report;
};

// Key/value header followed by the bin table; numbers at 12 significant digits.
std::string format_report(const ReportDocument& doc);
void write_report(const ReportDocument& doc, const fs::path& path);
ReportDocument parse_report(const std::string& text, const std::string& source = "<memory>");
ReportDocument read_report(const fs::path& path);

// Side-by-side table of reports: one row per strategy, metrics at 2 decimals.
std::string format_summary(std::span<const ReportDocument> docs);

// Little-endian binary: magic, dims, classes, seed, epochs, params.
void write_model(const ToyClassifier& model, const fs::path& path);
ToyClassifier read_model(const fs::path& path);

// Directory of <sample_id>.png plus labels.csv (sample_id,label) and priors.csv.
void write_dataset(const SyntheticDataset& ds, const fs::path& dir);
SyntheticDataset read_dataset(const fs::path& dir);

// 12 significant digits, as used in report files.
std::string format_g12(double v);

void write_text_file(const fs::path& path, const std::string& text);
std::string read_text_file(const fs::path& path);

}  // namespace uatta

#endif  // UATTA_IO_HPP
