#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace tagex {

// Lattice vector in up to three dimensions. Unused coordinates stay zero.
struct Lv {
    int d = 1;
    std::array<int64_t, 3> c{0, 0, 0};

    Lv() = default;
    Lv(int dim, int64_t x) : d(dim), c{x, 0, 0} {}
    Lv(int dim, int64_t x, int64_t y) : d(dim), c{x, y, 0} {}
    Lv(int dim, int64_t x, int64_t y, int64_t z) : d(dim), c{x, y, z} {}

    static Lv zero(int dim) { return Lv(dim, 0, 0, 0); }

    int64_t operator[](int i) const { return c[i]; }
    int64_t& operator[](int i) { return c[i]; }

    bool is_zero() const { return c[0] == 0 && c[1] == 0 && c[2] == 0; }

    // squared Euclidean norm, exact in integers
    int64_t norm2() const { return c[0] * c[0] + c[1] * c[1] + c[2] * c[2]; }
    double norm() const { return std::sqrt(double(norm2())); }

    // max norm
    int64_t norm_max() const {
        int64_t m = 0;
        for (int i = 0; i < d; ++i) m = std::max(m, std::abs(c[i]));
        return m;
    }

    Lv operator-() const { return Lv(d, -c[0], -c[1], -c[2]); }

    bool operator==(const Lv& o) const { return d == o.d && c == o.c; }
};

inline double dot(const Lv& z, const std::array<double, 3>& a) {
    return double(z.c[0]) * a[0] + double(z.c[1]) * a[1] + double(z.c[2]) * a[2];
}

// Packs coordinates into one key for hashing; coordinates must fit in 21 bits.
inline uint64_t pack_key(const Lv& z) {
    uint64_t k = 0;
    for (int i = 0; i < 3; ++i) k = (k << 21) | (uint64_t(z.c[i] + (1 << 20)) & 0x1FFFFF);
    return k;
}

} // namespace tagex
