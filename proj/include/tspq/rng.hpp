#pragma once

#include <cmath>
#include <cstdint>

namespace tspq {

/// SplitMix64 (Steele, Lea, Flood 2014). The whole sequence is a pure
/// function of the 64-bit seed, so runs are reproducible bit-for-bit on
/// any conforming implementation.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double next_unit() { return double(next() >> 11) * 0x1.0p-53; }

    /// Exponential with the given rate, by inversion.
    double next_exponential(double rate) {
        return -std::log1p(-next_unit()) / rate;
    }

private:
    std::uint64_t state_;
};

} // namespace tspq
