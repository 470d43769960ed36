#ifndef TRANSEPI_RNG_HPP
#define TRANSEPI_RNG_HPP

#include <cmath>
#include <cstdint>

#include "transepi/util.hpp"

namespace transepi {

// Sequential splitmix64 stream. Streams are derived by mixing a master seed
// with stream tags, so independent components never share state and results
// do not depend on how work is scheduled across threads.
class RandomStream {
public:
    explicit RandomStream(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n); unbiased via rejection.
    uint64_t next_below(uint64_t n) {
        if (n <= 1) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Standard normal via Box-Muller; stdlib distributions are avoided so
    // byte-identical output does not depend on the library implementation.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Derives an independent stream seed from a master seed and up to three tags.
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t h = mix64(master);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

// Stateless uniform in [0, 1) for a fully specified draw identity. Used where
// a draw must not depend on the order or number of preceding draws.
inline double keyed_uniform(uint64_t key_a, uint64_t key_b) {
    return double(mix64(mix64(key_a) ^ key_b) >> 11) * 0x1.0p-53;
}

}  // namespace transepi

#endif
