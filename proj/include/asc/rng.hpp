#pragma once

#include <cstdint>
#include <random>

namespace asc {

// Seeded generator whose outputs are identical on every platform: std::mt19937_64 is fully
// specified, and the conversions below avoid the implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), rejection sampled. n must be positive.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller; the second variate is discarded.
    double normal();

private:
    std::mt19937_64 engine_;
};

// Derives an independent stream seed from a base seed and a small tag (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

} // namespace asc
