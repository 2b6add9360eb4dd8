#pragma once

#include <cstdint>

namespace sqrn {

inline uint64_t splitmix64_next(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and a salt
/// (e.g. a sweep point index). Same (master, salt) always yields the
/// same seed, on every platform.
inline uint64_t derive_seed(uint64_t master, uint64_t salt) {
    uint64_t s = master;
    uint64_t h = splitmix64_next(s);
    s = h ^ (salt * 0xD6E8FEB86659FD93ull + 0x2545F4914F6CDD1Dull);
    h = splitmix64_next(s);
    return splitmix64_next(s) ^ (h << 1);
}

/// xoshiro256** pseudo-random stream. Deterministic and platform
/// independent; all randomness in the simulator flows through this
/// class so that identical seeds give bit-identical runs.
class Prng {
public:
    using result_type = uint64_t;

    explicit Prng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64_next(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    uint64_t operator()() { return next_u64(); }
    static constexpr uint64_t min() { return 0; }
    static constexpr uint64_t max() { return ~0ull; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t state_[4];
};

} // namespace sqrn
