#ifndef UATTA_TESTS_FIXTURES_HPP
#define UATTA_TESTS_FIXTURES_HPP

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "uatta/core.hpp"

namespace fixture {

// Valid set with n samples, k models and r replicates per pair. Ids are
// zero-padded so lexicographic order is index order.
inline uatta::PredictionSet random_set(std::mt19937_64& rng, int n, int C, int k, int r, double sharp = 0.3)
{
    std::vector<uatta::PredictionRecord> recs;
    for (int i = 0; i < n; ++i) {
        const uatta::GradeLabel y{static_cast<int>(rng() % static_cast<std::uint64_t>(C))};
        for (int m = 1; m <= k; ++m) {
            for (int rep = 0; rep < r; ++rep) {
                recs.push_back({fmt::format("x{:04d}", i), m, rep, oracle::random_simplex(rng, C, sharp), y});
            }
        }
    }
    return uatta::PredictionSet(std::move(recs), C, k);
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("uatta-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixture

#endif  // UATTA_TESTS_FIXTURES_HPP
