#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lvsim {

// splitmix64: cheap stateless mixer used to derive independent substream seeds
// from (seed, tag...) tuples so draw order in one component never perturbs another.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t h = splitmix64(seed ^ 0x6c62272e07bb0142ULL);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return splitmix64(h ^ c);
}

// Deterministic RNG wrapper. All bounded/real draws are hand-rolled on top of
// the raw 64-bit stream: std:: distribution objects are implementation-defined
// and would break byte-identical output across standard libraries.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform integer in [0, n), n >= 1; rejection sampling removes modulo bias
    uint64_t next_below(uint64_t n) {
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = gen_();
            if (r >= threshold) return r % n;
        }
    }

    int next_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // uniform real in [0, 1) with 53-bit resolution
    double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    // standard normal via Box-Muller (deterministic, no cached spare)
    double next_normal() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace lvsim
