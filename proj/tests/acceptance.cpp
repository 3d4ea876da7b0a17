// Acceptance checks 1-8. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "uatta/augment.hpp"
#include "uatta/ensemble.hpp"
#include "uatta/experiment.hpp"
#include "uatta/io.hpp"
#include "uatta/metrics.hpp"
#include "uatta/toymodel.hpp"
#include "uatta/uncertainty.hpp"

namespace fs = std::filesystem;
using namespace uatta;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects the first few failure messages of a criterion.
struct Tally {
    long cases = 0;
    long failures = 0;
    std::string first;

    void check(bool ok, const std::string& what)
    {
        ++cases;
        if (!ok) {
            if (failures == 0) first = what;
            ++failures;
        }
    }
    [[nodiscard]] Outcome outcome(const std::string& summary) const
    {
        if (failures == 0) return {true, fmt::format("{} ({} checks)", summary, cases)};
        return {false, fmt::format("{}: {} of {} checks failed, first: {}", summary, failures, cases, first)};
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<GradeLabel> argmax_labels(const std::vector<ProbabilityVector>& f)
{
    std::vector<GradeLabel> out;
    for (const auto& p : f) out.push_back({p.argmax()});
    return out;
}

bool on_simplex(const ProbabilityVector& p)
{
    double s = 0.0;
    for (double v : p.values()) {
        if (!(v >= 0.0)) return false;
        s += v;
    }
    return std::abs(s - 1.0) <= 1e-9;
}

// 1. metrics against the brute-force oracles
Outcome criterion1()
{
    std::mt19937_64 rng(101);
    Tally t;
    const int instances = 300;
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        const int C = 2 + static_cast<int>(rng() % 6);
        const int M = 1 + static_cast<int>(rng() % 15);
        const auto n = 1 + static_cast<std::size_t>(rng() % 500);
        std::vector<ProbabilityVector> f;
        for (std::size_t s = 0; s < n; ++s) f.push_back(oracle::random_simplex(rng, C));
        const auto y = oracle::random_labels(rng, n, C);
        const auto pred = argmax_labels(f);
        const auto r = evaluate_forecasts(f, y, C, M);

        const double errs[4] = {std::abs(r.ece - oracle::ece(f, y, M)), std::abs(r.mce - oracle::mce(f, y, M)),
                                std::abs(r.brier - oracle::brier(f, y)),
                                std::abs(r.qwk - oracle::qwk(pred, y, C))};
        for (double e : errs) {
            worst = std::max(worst, e);
            t.check(e <= 1e-12, fmt::format("instance {} (n={}, C={}, M={}) error {}", i, n, C, M, e));
        }
    }
    return t.outcome(fmt::format("{} instances, max abs error {:.2e} <= 1e-12", instances, worst));
}

// 2. metric invariants
Outcome criterion2()
{
    std::mt19937_64 rng(202);
    Tally t;
    const int cases = 2000;
    for (int i = 0; i < cases; ++i) {
        const int C = 2 + static_cast<int>(rng() % 6);
        const int M = 1 + static_cast<int>(rng() % 15);
        const auto n = 2 + static_cast<std::size_t>(rng() % 200);
        std::vector<ProbabilityVector> f;
        for (std::size_t s = 0; s < n; ++s) f.push_back(oracle::random_simplex(rng, C));
        auto y = oracle::random_labels(rng, n, C);
        const auto r = evaluate_forecasts(f, y, C, M);
        t.check(0.0 <= r.ece && r.ece <= r.mce, fmt::format("case {}: ece {} mce {}", i, r.ece, r.mce));

        // qwk(x, x) = 1 needs x to use at least two grades
        auto x = oracle::random_labels(rng, n, C);
        x[0].value = 0;
        x[1].value = C - 1;
        t.check(qwk(x, x, C) == 1.0, fmt::format("case {}: qwk(x, x) = {}", i, qwk(x, x, C)));
        t.check(qwk(x, y, C) == qwk(y, x, C), fmt::format("case {}: qwk asymmetric", i));

        // Brier is zero exactly for one-hot-correct forecasts.
        std::vector<ProbabilityVector> hot;
        for (const auto& l : y) hot.push_back(ProbabilityVector::one_hot(C, l.value));
        t.check(brier(hot, y) == 0.0, fmt::format("case {}: one-hot-correct brier {}", i, brier(hot, y)));
        auto off = hot;
        const auto k = static_cast<std::size_t>(rng() % n);
        if (rng() % 2 == 0) {
            off[k] = oracle::random_simplex(rng, C);  // soft forecast
        } else {
            off[k] = ProbabilityVector::one_hot(C, (y[k].value + 1) % C);  // confident and wrong
        }
        t.check(brier(off, y) > 0.0, fmt::format("case {}: imperfect forecast has brier 0", i));
    }
    return t.outcome(fmt::format("{} random cases", cases));
}

// 3. ensemble degeneracies
Outcome criterion3()
{
    std::mt19937_64 rng(303);
    Tally t;
    const int sets = 600;
    for (int i = 0; i < sets; ++i) {
        const int C = 2 + static_cast<int>(rng() % 6);
        const int k = 1 + static_cast<int>(rng() % 5);
        const int R = 1 + static_cast<int>(rng() % 4);
        const int n = 1 + static_cast<int>(rng() % 25);
        const auto set = fixture::random_set(rng, n, C, k, R, 0.5);

        const auto ua = run_strategy(set, {StrategyKind::ua_ensemble, 1, {}});
        t.check(run_strategy(set, {StrategyKind::uatta_ens, 1, {}}) == ua, fmt::format("set {}: uatta(R=1) != ua", i));

        std::vector<std::vector<ProbabilityVector>> outs{
            ua, run_strategy(set, {StrategyKind::single, 1, 1 + static_cast<int>(rng() % k)}),
            run_strategy(set, {StrategyKind::mean_ensemble, 1, {}}),
            run_strategy(set, {StrategyKind::tta_ensemble, R, {}}), run_strategy(set, {StrategyKind::uatta_ens, R, {}})};
        for (const auto& out : outs) {
            for (const auto& p : out) t.check(on_simplex(p), fmt::format("set {}: output off the simplex", i));
        }

        if (k >= 2) {
            for (int reps : {1, R}) {
                const auto table = build_uncertainty_table(set.restricted_to_replicates(reps));
                for (std::size_t s = 0; s < table.num_samples(); ++s) {
                    const double sum = std::accumulate(table.weight[s].begin(), table.weight[s].end(), 0.0);
                    t.check(std::abs(sum - 1.0) <= 1e-12, fmt::format("set {}: weights sum to {}", i, sum));
                }
            }
        }

        // Same set with every member voting for the label: all sigma equal.
        std::vector<PredictionRecord> recs = set.records();
        for (auto& r : recs) {
            std::vector<double> p(r.probs.values().begin(), r.probs.values().end());
            p[r.label.value] += 3.0;
            for (double& v : p) v /= 4.0;
            r.probs = ProbabilityVector(std::move(p));
        }
        const PredictionSet agree(recs, C, k);
        if (k >= 2) {
            const auto table = build_uncertainty_table(agree);
            bool equal = true;
            for (const auto& row : table.sigma) equal = equal && std::all_of(row.begin(), row.end(), [&](double s) {
                                                            return s == row.front();
                                                        });
            t.check(equal, fmt::format("set {}: agreeing members got unequal sigma", i));
        }
        t.check(run_strategy(agree, {StrategyKind::ua_ensemble, 1, {}}) ==
                    run_strategy(agree, {StrategyKind::mean_ensemble, 1, {}}),
                fmt::format("set {}: ua != mean with equal sigma", i));
    }
    return t.outcome(fmt::format("{} random prediction sets", sets));
}

// 4. modified LLFU behaviour
Outcome criterion4()
{
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Tally t;
    const int triples = 5000;
    for (int i = 0; i < triples; ++i) {
        const double mu = std::floor(u(rng) * 5.0);
        const double y = std::floor(u(rng) * 5.0);
        // variances from exactly 0 through tiny up to a few units
        const double var = i % 10 == 0 ? 0.0 : std::pow(10.0, -14.0 + 15.0 * u(rng));
        const double s = llfu_sigma(y, mu, var);
        t.check(s >= 0.0, fmt::format("sigma({}, {}, {}) = {}", y, mu, var, s));

        if (var >= kVarianceEpsilon) {
            const double d1 = u(rng) * 4.0, d2 = d1 + u(rng) * 4.0;
            const double s1 = llfu_sigma(mu + d1, mu, var), s2 = llfu_sigma(mu - d2, mu, var);
            t.check(s1 <= s2, fmt::format("not monotone at var {}: |d| {} -> {}, {} -> {}", var, d1, s1, d2, s2));
        }

        const int k = 2 + static_cast<int>(rng() % 7);
        std::vector<PredictionRecord> recs;
        const int grade = static_cast<int>(mu);
        for (int m = 1; m <= k; ++m) {
            auto p = oracle::random_simplex(rng, 5, 0.0);
            std::vector<double> v(p.values().begin(), p.values().end());
            v[grade] += 5.0;
            for (double& x : v) x /= 6.0;
            recs.push_back({"s", m, 0, ProbabilityVector(std::move(v)), GradeLabel{grade}});
        }
        const auto table = build_uncertainty_table(PredictionSet(recs, 5, k));
        for (double w : table.weight[0]) {
            t.check(w == 1.0 / k, fmt::format("all-agree weight {} != 1/{}", w, k));
        }
    }
    return t.outcome(fmt::format("{} random (y, mu, var) triples", triples));
}

// 5. augmentation
Outcome criterion5()
{
    Tally t;
    const int draws = 10000;
    for (int i = 1; i <= draws; ++i) {
        const auto p = sample_plan(55, fmt::format("s{:05d}", i % 97), i, 40, 36);
        const bool inside = p.brightness > -0.15 && p.brightness < 0.15 && p.saturation > 0.5 && p.saturation < 2.5 &&
                            p.hue > -0.15 && p.hue < 0.15 && p.contrast > 0.5 && p.contrast < 1.5 && p.crop.w >= 1 &&
                            p.crop.h >= 1 && p.crop.x >= 0 && p.crop.y >= 0 && p.crop.x + p.crop.w <= 40 &&
                            p.crop.y + p.crop.h <= 36;
        t.check(inside, fmt::format("draw {} outside the jitter ranges", i));
    }

    const auto ds = strip_background(generate_dataset(5, 40, default_class_priors(), {40, 0.6}));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& img = ds.images[i];
        t.check(apply_plan(img, identity_plan(5, ds.sample_ids[i], img.width, img.height)) == img,
                fmt::format("{}: identity plan changed pixels", ds.sample_ids[i]));
        t.check(flip_horizontal(flip_horizontal(img)) == img, "hflip not an involution");
        t.check(flip_vertical(flip_vertical(img)) == img, "vflip not an involution");
        for (int r = 1; r <= 5; ++r) {
            const auto plan = sample_plan(5, ds.sample_ids[i], r, img.width, img.height);
            const auto first = apply_plan(img, plan);
            // replay from the stored triple alone
            const auto again = apply_plan(img, sample_plan(plan.seed, plan.sample_id, plan.replicate_id, img.width,
                                                           img.height));
            t.check(first == again, fmt::format("{} replicate {}: replay differs", ds.sample_ids[i], r));
            t.check(first.width == img.width && first.height == img.height, "output dims changed");
        }
    }
    return t.outcome(fmt::format("{} plan draws, {} images x 5 replays", draws, ds.size()));
}

// 6. trainer
Outcome criterion6()
{
    Tally t;
    const auto small = preprocess_dataset(generate_dataset(6, 16, default_class_priors(), {20, 0.5}), 4);
    const auto batch = make_features(small.images, small.labels);
    std::mt19937_64 rng(606);
    std::normal_distribution<double> nd(0.0, 0.3);
    std::vector<double> params((batch.dim + 1) * 5);
    for (auto& p : params) p = nd(rng);
    const auto weights = inverse_prior_weights(default_class_priors());
    std::vector<double> grad(params.size());
    weighted_cross_entropy(params, 5, batch, weights, grad);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto j = static_cast<std::size_t>(rng() % params.size());
        auto plus = params, minus = params;
        plus[j] += 1e-6;
        minus[j] -= 1e-6;
        const double fd = (weighted_cross_entropy(plus, 5, batch, weights) -
                           weighted_cross_entropy(minus, 5, batch, weights)) /
                          2e-6;
        const double rel = std::abs(fd - grad[j]) / std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
        worst = std::max(worst, rel);
        t.check(rel <= 1e-4, fmt::format("param {}: relative error {}", j, rel));
    }

    const auto ds = preprocess_dataset(generate_dataset(8, 2000, default_class_priors(), {40, 0.0}), 32);
    const auto a = train(ds, 17, TrainOptions{});
    int hits = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) hits += predict(a, ds.images[i]).argmax() == ds.labels[i].value;
    const double acc = static_cast<double>(hits) / static_cast<double>(ds.size());
    t.check(acc >= 0.95, fmt::format("difficulty-0 train accuracy {}", acc));
    t.check(train(ds, 17, TrainOptions{}) == a, "same-seed retraining differs");
    return t.outcome(fmt::format("gradient max rel error {:.2e} <= 1e-4, difficulty-0 train accuracy {:.4f} >= 0.95",
                                 worst, acc));
}

std::map<std::string, std::string> read_tree(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_text_file(e.path());
    }
    return files;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"uatta acceptance checks"};
    fs::path workdir = fs::temp_directory_path() / "uatta-acceptance";
    int seeds = 10;
    app.add_option("--workdir", workdir, "scratch directory for experiment outputs");
    app.add_option("--seeds", seeds, "experiment seeds for criterion 7")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    fs::remove_all(workdir);
    fs::create_directories(workdir);

    int failed = 0;
    auto report = [&](int id, double limit, const std::function<Outcome()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        const double secs = seconds_since(t0);
        if (secs >= limit) {
            o.pass = false;
            o.detail += fmt::format("; exceeded the {:.0f} s budget", limit);
        }
        failed += o.pass ? 0 : 1;
        fmt::print("criterion {}: {}  {} [{:.1f} s < {:.0f} s]\n", id, o.pass ? "PASS" : "FAIL", o.detail, secs, limit);
        std::fflush(stdout);
    };

    report(1, 10, criterion1);
    report(2, 30, criterion2);
    report(3, 30, criterion3);
    report(4, 10, criterion4);
    report(5, 60, criterion5);
    report(6, 120, criterion6);

    report(7, 300, [&] {
        int ece_wins = 0, brier_wins = 0, qwk_close = 0, mean_vs_worst = 0;
        std::string table;
        for (int s = 1; s <= seeds; ++s) {
            ExperimentConfig c;
            c.seed = static_cast<std::uint64_t>(s);
            if (s == 1) c.out_dir = workdir / "seed1-a";
            const auto r = run_experiment(c);
            const auto& base = r.reports[0].report;
            const auto& ua = r.reports[4].report;
            double best = -2.0;
            for (const auto& d : r.reports) best = std::max(best, d.report.qwk);
            double worst_member = 0.0;
            for (const auto& m : r.member_reports) worst_member = std::max(worst_member, m.brier);
            ece_wins += ua.ece <= base.ece;
            brier_wins += ua.brier <= base.brier;
            qwk_close += ua.qwk >= best - 0.05;
            mean_vs_worst += r.reports[1].report.brier <= worst_member;
            table += fmt::format("    seed {:2d}: baseline ece {:.3f} brier {:.3f} qwk {:.3f} | uatta ece {:.3f} brier "
                                 "{:.3f} qwk {:.3f} | best qwk {:.3f}\n",
                                 s, base.ece, base.brier, base.qwk, ua.ece, ua.brier, ua.qwk, best);
        }
        const int need = (8 * seeds + 9) / 10;
        Outcome o;
        o.pass = ece_wins >= need && brier_wins >= need && qwk_close >= need;
        o.detail = fmt::format("UATTA-ENS ece <= baseline {}/{}, brier <= baseline {}/{}, qwk within 0.05 of best "
                               "{}/{} (need {} each); mean ensemble brier <= worst member {}/{}\n{}",
                               ece_wins, seeds, brier_wins, seeds, qwk_close, seeds, need, mean_vs_worst, seeds,
                               table);
        o.detail.pop_back();
        return o;
    });

    report(8, 120, [&] {
        const auto a = workdir / "seed1-a";
        if (!fs::exists(a)) {
            ExperimentConfig c;
            c.out_dir = a;
            run_experiment(c);
        }
        ExperimentConfig c;
        c.out_dir = workdir / "seed1-b";
        run_experiment(c);
        const auto ta = read_tree(a), tb = read_tree(c.out_dir);
        Outcome o;
        o.pass = !ta.empty() && ta == tb;
        o.detail = o.pass ? fmt::format("two runs wrote {} byte-identical files", ta.size())
                          : fmt::format("output directories differ ({} vs {} files)", ta.size(), tb.size());
        return o;
    });

    fmt::print("{} of 8 criteria passed\n", 8 - failed);
    return failed == 0 ? 0 : 1;
}
