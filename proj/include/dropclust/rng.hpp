#pragma once

#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace dropclust {

// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stable seed splitting: the seed of stream i depends only on (base, i), so
// adding more streams (e.g. trials) never changes earlier ones.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x532AB3964B1A239FULL));
}

// mt19937_64 plus hand-rolled draws. The std distributions are
// implementation-defined, so sequences would differ across standard
// libraries; these helpers keep runs reproducible everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), rejection sampled to remove modulo bias.
    std::size_t uniform_index(std::size_t n) {
        const auto nn = static_cast<std::uint64_t>(n);
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t reject_above = max - (max % nn + 1) % nn;
        std::uint64_t x = gen_();
        while (x > reject_above) x = gen_();
        return static_cast<std::size_t>(x % nn);
    }

    bool bernoulli(double prob) { return uniform01() < prob; }

    // Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = mag * std::sin(ang);
        have_spare_ = true;
        return mag * std::cos(ang);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace dropclust
