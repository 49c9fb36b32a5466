#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace gsn {

// xoshiro256** 1.0 (Blackman & Vigna, public-domain reference constants),
// seeded from a 64-bit value through splitmix64. Every random draw in the
// project flows through this generator so runs are reproducible across
// platforms and thread counts.
class Xoshiro256 {
  public:
    explicit Xoshiro256(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : s_) word = splitmix64(x);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Box-Muller transform; both branches of the pair are produced from one
    // (u1, u2) draw so the stream layout is fixed. u1 is mapped into (0, 1]
    // to keep the log finite.
    std::pair<double, double> next_gaussian_pair() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = next_double();                                            // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    // Fills out[0..n) with standard normals, consuming ceil(n/2) pairs.
    // For odd n the second branch of the final pair is discarded, so the
    // draw count depends only on n.
    void fill_gaussian(std::vector<double>& out) {
        size_t i = 0;
        while (i + 1 < out.size()) {
            auto [a, b] = next_gaussian_pair();
            out[i++] = a;
            out[i++] = b;
        }
        if (i < out.size()) out[i] = next_gaussian_pair().first;
    }

    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4];
};

}  // namespace gsn
