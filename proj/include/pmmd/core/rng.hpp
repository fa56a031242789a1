#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "pmmd/core/common.hpp"

namespace pmmd {

// splitmix64 step; also used to hash seed components into independent streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derives a child seed from (seed, tag, indices...). Every consumer of randomness
// in the project draws from its own derived stream, so adding or removing one
// consumer never shifts the draws seen by another.
inline std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag) {
    std::uint64_t s = seed ^ 0xa0761d6478bd642full;
    std::uint64_t h = splitmix64(s);
    for (char c : tag) {
        s = h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h = splitmix64(s);
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag, std::uint64_t a) {
    std::uint64_t s = derive_seed(seed, tag) ^ (a * 0xff51afd7ed558ccdull + 1);
    return splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag, std::uint64_t a,
                                 std::uint64_t b) {
    std::uint64_t s = derive_seed(seed, tag, a) ^ (b * 0xc4ceb9fe1a85ec53ull + 1);
    return splitmix64(s);
}

// xoshiro256++ with explicit Box-Muller normals. Self-contained so results do not
// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
        has_spare_ = false;
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        PMMD_CHECK(n > 0, "uniform_int: n must be positive");
        // rejection sampling to avoid modulo bias
        const std::uint64_t limit = ~0ull - (~0ull % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_;
};

}  // namespace pmmd
