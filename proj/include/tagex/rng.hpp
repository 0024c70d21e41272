#pragma once

#include <cstdint>
#include <cmath>
#include <limits>

namespace tagex {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256++ seeded through splitmix64 from (master seed, replica index, tag).
// One instance per replica; never shared across threads.
class Rng {
public:
    using result_type = uint64_t;

    Rng() : Rng(0, 0, 0) {}
    Rng(uint64_t master, uint64_t stream, uint64_t tag = 0) {
        uint64_t sm = master ^ (0xA0761D6478BD642FULL * (stream + 1)) ^ (0xE7037ED1A0B428DBULL * (tag + 1));
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr uint64_t min() { return 0; }
    static constexpr uint64_t max() { return std::numeric_limits<uint64_t>::max(); }

    uint64_t operator()() { return next(); }

    uint64_t next() {
        uint64_t r = rotl(s_[0] + s_[3], 23) + s_[0];
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return r;
    }

    // uniform in [0,1) with 53-bit resolution
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n) via Lemire's multiply-shift
    uint64_t below(uint64_t n) {
        unsigned __int128 m = (unsigned __int128)next() * n;
        return uint64_t(m >> 64);
    }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

} // namespace tagex
