#ifndef UATTA_RANDOM_HPP
#define UATTA_RANDOM_HPP

#include <cstdint>
#include <string_view>

namespace uatta {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t combine_keys(std::uint64_t a, std::uint64_t b)
{
    return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

// Counter-based generator: draw i is mix64(key + i * gamma), so the stream for a
// given key is independent of how many other streams exist or in which order
// they are consumed. Distributions are implemented here rather than with
// <random> because the standard distributions are implementation-defined.
class KeyedStream {
public:
    explicit KeyedStream(std::uint64_t key) : key_(mix64(key)) {}
    KeyedStream(std::uint64_t seed, std::string_view name, std::uint64_t index)
        : KeyedStream(combine_keys(combine_keys(seed, fnv1a(name)), index)) {}

    std::uint64_t next_u64() { return mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL); }

    // Uniform on the open interval (0, 1).
    double uniform01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    // Uniform strictly inside (lo, hi); redraws on the rare rounding onto an endpoint.
    double uniform_open(double lo, double hi);

    // Uniform integer in [0, bound), bound >= 1.
    std::uint64_t uniform_index(std::uint64_t bound);

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via Box-Muller (one value per call).
    double normal();

private:
    std::uint64_t key_;
    std::uint64_t counter_{0};
};

}  // namespace uatta

#endif  // UATTA_RANDOM_HPP
