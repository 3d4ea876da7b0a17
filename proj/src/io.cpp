#include "uatta/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "uatta/ensemble.hpp"
#include "uatta/image_io.hpp"

namespace uatta {

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::vector<std::string> split_lines(const std::string& text)
{
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    return lines;
}

bool parse_double(const std::string& s, double& out)
{
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !s.empty();
}

template <typename Int>
bool parse_int(const std::string& s, Int& out)
{
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

void check_sample_id(const std::string& id)
{
    if (id.empty() || id.find_first_of(",\"\r\n") != std::string::npos) {
        throw Error(fmt::format("sample id '{}' is empty or contains a CSV delimiter", id));
    }
}

std::string g17(double v)
{
    return fmt::format("{:.17g}", v);
}

}  // namespace

std::string format_g12(double v)
{
    return fmt::format("{:.12g}", v);
}

void write_text_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(fmt::format("cannot write '{}'", path.string()));
    }
    out << text;
    if (!out) {
        throw Error(fmt::format("cannot write '{}'", path.string()));
    }
}

std::string read_text_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(fmt::format("cannot open '{}'", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_predictions(const PredictionSet& set)
{
    std::string out = "sample_id,model_id,replicate_id";
    for (int c = 0; c < set.num_classes(); ++c) {
        out += fmt::format(",p{}", c);
    }
    out += ",label\n";
    for (const auto& r : set.sorted_records()) {
        check_sample_id(r.sample_id);
        out += fmt::format("{},{},{}", r.sample_id, r.model_id, r.replicate_id);
        for (double p : r.probs.values()) {
            out += ',';
            out += g17(p);
        }
        out += fmt::format(",{}\n", r.label.value);
    }
    return out;
}

void write_predictions(const PredictionSet& set, const fs::path& path)
{
    write_text_file(path, format_predictions(set));
}

PredictionSet parse_predictions(const std::string& text, const std::string& source)
{
    const auto lines = split_lines(text);
    auto fail = [&](std::size_t line_no, const std::string& why) {
        return Error(fmt::format("{}: line {}: {}", source, line_no, why));
    };
    if (lines.empty()) {
        throw Error(fmt::format("{}: empty file", source));
    }
    const auto header = split_csv(lines.front());
    const int classes = static_cast<int>(header.size()) - 4;
    if (classes < 1 || header[0] != "sample_id" || header[1] != "model_id" || header[2] != "replicate_id" ||
        header.back() != "label") {
        throw fail(1, "header must be sample_id,model_id,replicate_id,p0..p{C-1},label");
    }
    for (int c = 0; c < classes; ++c) {
        if (header[3 + c] != fmt::format("p{}", c)) {
            throw fail(1, fmt::format("expected column 'p{}', found '{}'", c, header[3 + c]));
        }
    }

    std::vector<PredictionRecord> records;
    std::set<std::tuple<std::string, int, int>> keys;
    int max_model = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (lines[i].empty()) {
            continue;
        }
        const auto cells = split_csv(lines[i]);
        if (cells.size() != header.size()) {
            throw fail(line_no, fmt::format("expected {} columns, got {}", header.size(), cells.size()));
        }
        PredictionRecord r;
        r.sample_id = cells[0];
        if (r.sample_id.empty()) {
            throw fail(line_no, "empty sample_id");
        }
        if (!parse_int(cells[1], r.model_id) || r.model_id < 1) {
            throw fail(line_no, fmt::format("model_id '{}' is not an integer >= 1", cells[1]));
        }
        if (!parse_int(cells[2], r.replicate_id) || r.replicate_id < 0) {
            throw fail(line_no, fmt::format("replicate_id '{}' is not an integer >= 0", cells[2]));
        }
        std::vector<double> p(classes);
        for (int c = 0; c < classes; ++c) {
            if (!parse_double(cells[3 + c], p[c])) {
                throw fail(line_no, fmt::format("non-numeric probability '{}' in column p{}", cells[3 + c], c));
            }
        }
        ProbabilityVector probs(std::move(p));
        if (auto why = probs.simplex_violation(); !why.empty()) {
            throw fail(line_no, why);
        }
        r.probs = probs.renormalized();
        if (!parse_int(cells.back(), r.label.value) || r.label.value < 0 || r.label.value >= classes) {
            throw fail(line_no, fmt::format("label '{}' is not a grade in [0, {}]", cells.back(), classes - 1));
        }
        if (!keys.emplace(r.sample_id, r.model_id, r.replicate_id).second) {
            throw fail(line_no, fmt::format("duplicate key ({}, {}, {})", r.sample_id, r.model_id, r.replicate_id));
        }
        max_model = std::max(max_model, r.model_id);
        records.push_back(std::move(r));
    }
    if (records.empty()) {
        throw Error(fmt::format("{}: no samples", source));
    }
    PredictionSet set(std::move(records), classes, max_model);
    if (auto v = validate_prediction_set(set); !v.ok()) {
        std::string msg = fmt::format("{}: invalid prediction set:", source);
        for (const auto& s : v.violations) {
            msg += "\n  " + s;
        }
        throw Error(msg);
    }
    return set;
}

PredictionSet read_predictions(const fs::path& path)
{
    return parse_predictions(read_text_file(path), path.string());
}

void write_forecasts(std::span<const std::string> sample_ids, std::span<const ProbabilityVector> forecasts,
                     std::span<const GradeLabel> labels, const fs::path& path)
{
    if (sample_ids.size() != forecasts.size() || labels.size() != forecasts.size()) {
        throw Error("forecast columns differ in length");
    }
    const std::size_t classes = forecasts.empty() ? 0 : forecasts.front().size();
    std::string out = "sample_id";
    for (std::size_t c = 0; c < classes; ++c) {
        out += fmt::format(",p{}", c);
    }
    out += ",label\n";
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        check_sample_id(sample_ids[i]);
        out += sample_ids[i];
        for (double p : forecasts[i].values()) {
            out += ',';
            out += g17(p);
        }
        out += fmt::format(",{}\n", labels[i].value);
    }
    write_text_file(path, out);
}

void write_uncertainty_table(const UncertaintyTable& table, const fs::path& path)
{
    std::string out = "sample_id,model_id,sigma,weight,mu,var\n";
    for (std::size_t s = 0; s < table.num_samples(); ++s) {
        for (std::size_t m = 0; m < table.sigma[s].size(); ++m) {
            out += fmt::format("{},{},{},{},{},{}\n", table.sample_ids[s], m + 1, g17(table.sigma[s][m]),
                               g17(table.weight[s][m]), g17(table.mu[s]), g17(table.var[s]));
        }
    }
    write_text_file(path, out);
}

std::string format_bins(std::span<const BinStat> bins)
{
    std::string out = "bin_index,lower,upper,count,accuracy,confidence\n";
    for (const auto& b : bins) {
        out += fmt::format("{},{},{},{},{},{}\n", b.bin_index, format_g12(b.lower), format_g12(b.upper), b.count,
                           format_g12(b.accuracy), format_g12(b.confidence));
    }
    return out;
}

void write_bins(std::span<const BinStat> bins, const fs::path& path)
{
    write_text_file(path, format_bins(bins));
}

std::string format_plans(std::span<const AugmentationPlan> plans)
{
    std::string out = "seed,sample_id,replicate_id,b,s,h,c,crop_x,crop_y,crop_w,crop_h,hflip,vflip\n";
    for (const auto& p : plans) {
        check_sample_id(p.sample_id);
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", p.seed, p.sample_id, p.replicate_id,
                           g17(p.brightness), g17(p.saturation), g17(p.hue), g17(p.contrast), p.crop.x, p.crop.y,
                           p.crop.w, p.crop.h, p.hflip ? 1 : 0, p.vflip ? 1 : 0);
    }
    return out;
}

void write_plans(std::span<const AugmentationPlan> plans, const fs::path& path)
{
    write_text_file(path, format_plans(plans));
}

std::string format_report(const ReportDocument& doc)
{
    const auto& r = doc.report;
    std::string out = "# calibration report\n";
    out += fmt::format("strategy: {}\n", doc.strategy);
    out += fmt::format("replicates: {}\n", doc.replicates);
    out += fmt::format("bins: {}\n", r.num_bins);
    out += fmt::format("n: {}\n", r.n);
    out += fmt::format("models: {}\n", doc.models);
    out += fmt::format("ece: {}\n", format_g12(r.ece));
    out += fmt::format("mce: {}\n", format_g12(r.mce));
    out += fmt::format("brier: {}\n", format_g12(r.brier));
    out += fmt::format("qwk: {}\n", format_g12(r.qwk));
    out += "\n";
    out += format_bins(r.bins);
    return out;
}

void write_report(const ReportDocument& doc, const fs::path& path)
{
    write_text_file(path, format_report(doc));
}

ReportDocument parse_report(const std::string& text, const std::string& source)
{
    const auto lines = split_lines(text);
    auto fail = [&](std::size_t line_no, const std::string& why) {
        return Error(fmt::format("{}: line {}: {}", source, line_no, why));
    };
    std::map<std::string, std::string> fields;
    std::size_t i = 0;
    for (; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (line.rfind("bin_index,", 0) == 0) {
            break;
        }
        const auto colon = line.find(": ");
        if (colon == std::string::npos) {
            throw fail(i + 1, "expected 'key: value'");
        }
        fields[line.substr(0, colon)] = line.substr(colon + 2);
    }
    auto field = [&](const std::string& key) -> const std::string& {
        auto it = fields.find(key);
        if (it == fields.end()) {
            throw Error(fmt::format("{}: missing field '{}'", source, key));
        }
        return it->second;
    };
    auto number = [&](const std::string& key) {
        double v = 0.0;
        if (!parse_double(field(key), v)) {
            throw Error(fmt::format("{}: field '{}' is not a number", source, key));
        }
        return v;
    };
    auto integer = [&](const std::string& key) {
        long v = 0;
        if (!parse_int(field(key), v)) {
            throw Error(fmt::format("{}: field '{}' is not an integer", source, key));
        }
        return v;
    };

    ReportDocument doc;
    doc.strategy = field("strategy");
    doc.replicates = static_cast<int>(integer("replicates"));
    doc.models = static_cast<int>(integer("models"));
    doc.report.num_bins = static_cast<int>(integer("bins"));
    doc.report.n = integer("n");
    doc.report.ece = number("ece");
    doc.report.mce = number("mce");
    doc.report.brier = number("brier");
    doc.report.qwk = number("qwk");

    if (i == lines.size()) {
        throw Error(fmt::format("{}: missing bin table", source));
    }
    for (++i; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        const auto cells = split_csv(lines[i]);
        BinStat b;
        if (cells.size() != 6 || !parse_int(cells[0], b.bin_index) || !parse_double(cells[1], b.lower) ||
            !parse_double(cells[2], b.upper) || !parse_int(cells[3], b.count) || !parse_double(cells[4], b.accuracy) ||
            !parse_double(cells[5], b.confidence)) {
            throw fail(i + 1, "malformed bin row");
        }
        doc.report.bins.push_back(b);
    }
    if (static_cast<int>(doc.report.bins.size()) != doc.report.num_bins) {
        throw Error(fmt::format("{}: {} bin rows but bins = {}", source, doc.report.bins.size(), doc.report.num_bins));
    }
    return doc;
}

ReportDocument read_report(const fs::path& path)
{
    return parse_report(read_text_file(path), path.string());
}

std::string format_summary(std::span<const ReportDocument> docs)
{
    std::string out = fmt::format("{:<28} {:>11} {:>6} {:>6} {:>11}\n", "Model Architecture", "Cohen-Kappa", "ECE",
                                  "MCE", "Brier Score");
    for (const auto& d : docs) {
        std::string title = d.strategy;
        try {
            title = std::string(strategy_title(parse_strategy(d.strategy)));
        } catch (const Error&) {
        }
        out += fmt::format("{:<28} {:>11.2f} {:>6.2f} {:>6.2f} {:>11.2f}\n", title, d.report.qwk, d.report.ece,
                           d.report.mce, d.report.brier);
    }
    return out;
}

namespace {

constexpr std::array<char, 8> kModelMagic = {'U', 'A', 'T', 'T', 'A', 'M', 'D', '1'};

void put_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void put_f64(std::string& out, double v)
{
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

struct ByteReader {
    const std::string& data;
    std::size_t pos{0};
    std::string source;

    std::uint64_t u64()
    {
        if (pos + 8 > data.size()) {
            throw Error(fmt::format("{}: truncated model file", source));
        }
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        }
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace

void write_model(const ToyClassifier& model, const fs::path& path)
{
    std::string out(kModelMagic.begin(), kModelMagic.end());
    put_u64(out, static_cast<std::uint64_t>(model.width));
    put_u64(out, static_cast<std::uint64_t>(model.height));
    put_u64(out, static_cast<std::uint64_t>(model.num_classes));
    put_u64(out, model.seed);
    put_u64(out, static_cast<std::uint64_t>(model.epochs_trained));
    put_u64(out, model.params.size());
    for (double p : model.params) {
        put_f64(out, p);
    }
    put_u64(out, model.loss_history.size());
    for (double l : model.loss_history) {
        put_f64(out, l);
    }
    write_text_file(path, out);
}

ToyClassifier read_model(const fs::path& path)
{
    const std::string data = read_text_file(path);
    if (data.size() < kModelMagic.size() || !std::equal(kModelMagic.begin(), kModelMagic.end(), data.begin())) {
        throw Error(fmt::format("{}: not a model file", path.string()));
    }
    ByteReader in{data, kModelMagic.size(), path.string()};
    ToyClassifier m;
    m.width = static_cast<int>(in.u64());
    m.height = static_cast<int>(in.u64());
    m.num_classes = static_cast<int>(in.u64());
    m.seed = in.u64();
    m.epochs_trained = static_cast<int>(in.u64());
    const auto count = in.u64();
    if (count != m.param_count()) {
        throw Error(fmt::format("{}: {} parameters, header implies {}", path.string(), count, m.param_count()));
    }
    m.params.resize(count);
    for (double& p : m.params) {
        p = in.f64();
    }
    m.loss_history.resize(in.u64());
    for (double& l : m.loss_history) {
        l = in.f64();
    }
    if (in.pos != data.size()) {
        throw Error(fmt::format("{}: trailing bytes after model", path.string()));
    }
    return m;
}

void write_dataset(const SyntheticDataset& ds, const fs::path& dir)
{
    fs::create_directories(dir);
    std::string labels = "sample_id,label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        check_sample_id(ds.sample_ids[i]);
        write_png(ds.images[i], dir / (ds.sample_ids[i] + ".png"));
        labels += fmt::format("{},{}\n", ds.sample_ids[i], ds.labels[i].value);
    }
    write_text_file(dir / "labels.csv", labels);
    std::string priors = "class,prior\n";
    for (std::size_t c = 0; c < ds.class_priors.size(); ++c) {
        priors += fmt::format("{},{}\n", c, g17(ds.class_priors[c]));
    }
    write_text_file(dir / "priors.csv", priors);
}

SyntheticDataset read_dataset(const fs::path& dir)
{
    SyntheticDataset ds;
    const auto prior_lines = split_lines(read_text_file(dir / "priors.csv"));
    for (std::size_t i = 1; i < prior_lines.size(); ++i) {
        if (prior_lines[i].empty()) {
            continue;
        }
        const auto cells = split_csv(prior_lines[i]);
        double p = 0.0;
        if (cells.size() != 2 || !parse_double(cells[1], p)) {
            throw Error(fmt::format("{}: line {}: malformed prior row", (dir / "priors.csv").string(), i + 1));
        }
        ds.class_priors.push_back(p);
    }
    const auto label_lines = split_lines(read_text_file(dir / "labels.csv"));
    for (std::size_t i = 1; i < label_lines.size(); ++i) {
        if (label_lines[i].empty()) {
            continue;
        }
        const auto cells = split_csv(label_lines[i]);
        int label = 0;
        if (cells.size() != 2 || !parse_int(cells[1], label) || label < 0 ||
            label >= static_cast<int>(ds.class_priors.size())) {
            throw Error(fmt::format("{}: line {}: malformed label row", (dir / "labels.csv").string(), i + 1));
        }
        ds.sample_ids.push_back(cells[0]);
        ds.labels.push_back(GradeLabel{label});
        ds.images.push_back(read_image(dir / (cells[0] + ".png")));
    }
    if (ds.size() == 0) {
        throw Error(fmt::format("{}: no samples", dir.string()));
    }
    return ds;
}

}  // namespace uatta
