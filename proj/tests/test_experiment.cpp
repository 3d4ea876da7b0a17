#include <doctest.h>

#include "fixtures.hpp"
#include "uatta/experiment.hpp"

using namespace uatta;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.n_samples = 120;
    c.epochs = 3;
    c.models = 3;
    c.replicates = 2;
    c.raw_side = 24;
    c.image_side = 8;
    return c;
}

}  // namespace

TEST_CASE("experiment is deterministic and complete")
{
    auto c = small_config();
    const auto first = fixture::scratch("exp-a");
    c.out_dir = first;
    const auto a = run_experiment(c);
    REQUIRE(a.reports.size() == 5);
    CHECK(a.member_reports.size() == 3);
    CHECK(a.reports[0].strategy == "single");
    CHECK(a.reports[4].strategy == "uatta");
    CHECK(a.reports[4].replicates == 3);
    CHECK(a.reports[0].models == 1);
    CHECK(std::count(a.summary.begin(), a.summary.end(), '\n') == 6);

    c.out_dir = fixture::scratch("exp-b");
    const auto b = run_experiment(c);
    CHECK(a.summary == b.summary);
    for (const char* f : {"config.txt", "predictions.csv", "summary.txt", "report_single.txt", "report_mean.txt",
                          "report_tta.txt", "report_ua.txt", "report_uatta.txt"}) {
        CHECK(read_text_file(first / f) == read_text_file(c.out_dir / f));
    }
    for (const auto& d : a.reports) CHECK(d.report.ece <= d.report.mce + 1e-15);
}

TEST_CASE("config validation")
{
    auto c = small_config();
    c.models = 0;
    CHECK_THROWS_WITH_AS(run_experiment(c), doctest::Contains("models"), Error);
    c = small_config();
    c.class_priors = {0.5, 0.6};
    CHECK_THROWS_AS(run_experiment(c), Error);
    c = small_config();
    c.difficulty = 1.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = small_config();
    c.crop_scale = {0.0, 1.0};
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK(small_config().describe().find("seed: 1\n") != std::string::npos);
}

TEST_CASE("stage names appear in errors")
{
    auto c = small_config();
    c.models = 1;  // the ensembles reduce to the lone member, with or without TTA
    const auto one = run_experiment(c);
    CHECK(one.reports[1].report.brier == one.reports[0].report.brier);
    CHECK(one.reports[3].report.brier == one.reports[0].report.brier);
    CHECK(one.reports[4].report.brier == one.reports[2].report.brier);
    c = small_config();
    c.out_dir = "/proc/uatta-cannot-write";
    CHECK_THROWS_WITH_AS(run_experiment(c), doctest::Contains("stage 'setup'"), Error);
}
