#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace gmi {

// FNV-1a, used for content hashing and for deriving named sub-seeds.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t h = 1469598103934665603ULL);
std::uint64_t fnv1a64(std::string_view s);

// Deterministic splitmix64 generator. The standard <random> distributions are
// implementation-defined, so uniform/normal draws are implemented here to make
// seeded runs reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Independent child stream named by role. Does not consume parent state,
    // so the same (state, role) pair always yields the same stream.
    Rng fork(std::string_view role) const;

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gmi
