#pragma once

#include <cstdint>
#include <random>

namespace unionlap {

/// splitmix64 step; used both as a generator and to derive sub-seeds.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Sub-seed for stream `index` of master `seed`. Sampling uses one stream per
/// mixture component so that results do not depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64_next(s);
    s = seed ^ (0xd1b54a32d192ed03ULL * (index + 1));
    std::uint64_t b = splitmix64_next(s);
    return a ^ b;
}

/// Deterministic RNG wrapper. Only raw mt19937_64 output is consumed (the
/// standard pins its bit stream; the std distributions are not portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0,1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Standard normal via Box-Muller on our own uniforms.
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace unionlap
