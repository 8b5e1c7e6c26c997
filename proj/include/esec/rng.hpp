#pragma once
// Deterministic, platform-independent random stream (splitmix64).
// Used by the noise harness and the randomized test generators so that
// identical seeds give identical episodes on every build.

#include <cstdint>
#include <string_view>

namespace esec {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

private:
    std::uint64_t state_;
};

// Stable derivation of per-episode substreams from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, const std::string_view tag) {
    std::uint64_t h = master ^ 0x51afd6ed558ccd6dULL;
    for (char c : tag) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    return SplitMix64(h).next_u64();
}

} // namespace esec
