#ifndef RESFI_RNG_HPP
#define RESFI_RNG_HPP

#include <cstdint>
#include <cstddef>
#include <string_view>

namespace resfi {

// Deterministic PRNG (xoshiro256**) seeded through splitmix64.  We ship our
// own generator because std <random> distributions are not bit-portable
// across standard library implementations, and run reports must be
// byte-identical for a fixed seed on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : s_) w = splitmix(x);
    }

    uint64_t next_u64() {
        uint64_t result = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, n).  n == 0 yields 0.
    uint64_t next_below(uint64_t n) {
        if (n == 0) return 0;
        // Rejection sampling to avoid modulo bias.
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        double u = double(next_u64() >> 11) * 0x1.0p-53; // [0,1)
        return lo + (hi - lo) * u;
    }

    bool chance(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform(0.0, 1.0) < p;
    }

    void fill(uint8_t* out, size_t n) {
        size_t i = 0;
        while (i + 8 <= n) {
            uint64_t v = next_u64();
            for (int k = 0; k < 8; ++k) out[i++] = uint8_t(v >> (k * 8));
        }
        if (i < n) {
            uint64_t v = next_u64();
            while (i < n) {
                out[i++] = uint8_t(v);
                v >>= 8;
            }
        }
    }

    // Derive an independent child stream.  Label-keyed so that adding a new
    // consumer does not shift the draws seen by existing ones.
    Rng fork(std::string_view label) {
        uint64_t h = 1469598103934665603ull; // FNV-1a offset basis
        for (char c : label) {
            h ^= uint8_t(c);
            h *= 1099511628211ull;
        }
        uint64_t x = next_u64() ^ h;
        return Rng(splitmix(x));
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static uint64_t splitmix(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t s_[4];
};

} // namespace resfi

#endif
