#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sdseq {

// SplitMix64 (Steele, Lea & Flood 2014). Chosen because it is tiny, fast,
// counter-based (the state advances by a fixed additive constant, so the
// n-th output is a pure hash of seed + n*gamma), and therefore trivially
// splittable into independent streams. All simulation randomness in this
// library flows through this generator so that a (seed, stream) pair
// reproduces bit-identical runs across builds using the same libm.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0, 1]: 53-bit mantissa, never exactly 0 so logs are safe.
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform on [0, 1).
    double next_unit_co() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // One Box-Muller pair; always consumes exactly two uniforms.
    void next_gaussian_pair(double& z1, double& z2) {
        const double u1 = next_unit();
        const double u2 = next_unit_co();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        z1 = r * std::cos(theta);
        z2 = r * std::sin(theta);
    }

    double next_gaussian() {
        double z1, z2;
        next_gaussian_pair(z1, z2);
        return z1;
    }

private:
    std::uint64_t state_;
};

// Derives the seed for stream `index` from a master seed. Distinct indices
// give statistically independent SplitMix64 streams; used to give every
// simulation replication its own stream.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
    SplitMix64 g(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
    return g.next_u64();
}

} // namespace sdseq
