#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace tdcsync {

// splitmix64 step (Vigna, public domain): advances `state` and returns a
// well-mixed 64-bit value. Used for seed expansion and child-stream derivation.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic PRNG (xoshiro256++ core, Box-Muller gaussians).
//
// The standard-library distributions are implementation-defined, so all
// variate generation is done by hand here: results are bit-identical across
// platforms and compiler versions for a fixed seed. Child streams addressed
// by an index path (see stream()) are statistically independent, which lets
// work be sharded across threads without changing any result.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64_next(sm);
    }

    // Child stream for (seed, path...): distinct paths give independent
    // streams, so e.g. (trial, channel) pairs can be simulated in any order,
    // on any number of threads, with identical results.
    static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::uint64_t sm = seed;
        std::uint64_t mixed = splitmix64_next(sm);
        for (std::uint64_t index : path) {
            sm = mixed ^ (index + 0x9e3779b97f4a7c15ull);
            mixed = splitmix64_next(sm);
        }
        return Rng(mixed);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Gaussian via Box-Muller. Always consumes exactly two uniforms, so the
    // draw count per call never depends on the parameters.
    double gaussian(double mean, double sigma) {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * radius * std::cos(2.0 * kPi * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, bound). Modulo bias is < 2^-32 for the small
    // bounds used here (bubble positions), far below any tested tolerance.
    std::uint32_t below(std::uint32_t bound) {
        return static_cast<std::uint32_t>(next_u64() % bound);
    }

private:
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

}  // namespace tdcsync
