#pragma once

#include <cmath>
#include <cstdint>

namespace sirf {

// Counter-style PRNG built on splitmix64. Every measurement derives its own
// stream from a hash of (seed, ids...), which makes results independent of
// loop order: the OpenMP kernels and the serial reference produce bit-identical
// output. Normal deviates use an explicit Box-Muller so values do not depend
// on the standard library's distribution implementation.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t seed) { return splitmix64(seed); }

template <typename... Rest>
inline uint64_t hash_combine(uint64_t seed, uint64_t next, Rest... rest) {
    return hash_combine(splitmix64(seed ^ (next + 0x9e3779b97f4a7c15ULL)), rest...);
}

class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(splitmix64(seed)) {}

    template <typename... Ids>
    static Rng stream(uint64_t seed, Ids... ids) {
        return Rng(hash_combine(seed, static_cast<uint64_t>(ids)...));
    }

    uint64_t next_u64() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
        z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
        return z ^ (z >> 33);
    }

    // Uniform in [0, 1).
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n).
    uint64_t next_below(uint64_t n) { return n ? next_u64() % n : 0; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal deviate (Box-Muller, first component only).
    double normal() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    bool bernoulli(double p) { return next_double() < p; }

  private:
    uint64_t state_;
};

}  // namespace sirf
