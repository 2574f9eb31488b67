#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace lc {

// Counter-style splitmix64 generator. Self-contained so that streams are
// reproducible bit-for-bit independent of the standard library, and cheap to
// fork into derived streams via mix().
struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(seed) {}

    uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Uniform integer in [lo, hi] inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t span = uint64_t(hi - lo) + 1;
        return lo + int64_t(next_u64() % span);
    }

    bool bernoulli(double p) { return unit() < p; }

    // Box-Muller; draws two uniforms per call, no cached second value.
    double normal() {
        double u1 = unit();
        if (u1 < 1e-300) u1 = 1e-300;
        double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // Derive a decorrelated seed from a list of components.
    static uint64_t mix(std::initializer_list<uint64_t> parts) {
        uint64_t h = 0x243f6a8885a308d3ull;
        for (uint64_t p : parts) {
            h ^= p + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h += 0x9e3779b97f4a7c15ull;
            h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
            h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
            h ^= h >> 31;
        }
        return h;
    }
};

}  // namespace lc
