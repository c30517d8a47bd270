#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace dynfit {

/// splitmix64 mix, used to derive independent stream seeds from a base seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t tag) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seeded generator with pinned output sequences. The distributions are
/// implemented here (not via std::*_distribution) so results are identical
/// across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    /// Uniform in (0,1).
    double uniform01() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller.
    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Uniform integer in [0, n) by rejection.
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    /// k distinct indices from [0, n), ascending. Partial Fisher-Yates.
    std::vector<long> sample_indices(long n, long k) {
        std::vector<long> pool(static_cast<size_t>(n));
        for (long i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
        if (k > n) k = n;
        for (long i = 0; i < k; ++i) {
            const long j = i + static_cast<long>(below(static_cast<uint64_t>(n - i)));
            std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
        }
        pool.resize(static_cast<size_t>(k));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace dynfit
