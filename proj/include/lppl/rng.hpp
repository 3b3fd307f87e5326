#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lppl::rng {

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic 64-bit random stream (splitmix64). Every consumer of
/// randomness in the library derives an index-addressed substream from a
/// single top-level seed, so results are reproducible regardless of
/// evaluation order or threading.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Uniform index in [0, n); n must be positive.
    std::size_t next_index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    /// Standard normal via Box-Muller (pair cached).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        while (u1 <= 0.0)
            u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Independent stream addressed by (domain, key); pure function of the
    /// parent seed, not of how much the parent has been consumed.
    Stream substream(std::uint64_t domain, std::uint64_t key = 0) const {
        return Stream(splitmix64_mix(splitmix64_mix(seed_ ^ (domain * 0x9e3779b97f4a7c15ULL)) + key));
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace lppl::rng
