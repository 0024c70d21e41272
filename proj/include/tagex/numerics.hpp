#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace tagex::num {

struct Kahan {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double get() const { return s; }
};

struct GlRule {
    std::vector<double> x, w; // nodes/weights on [-1,1]
};

// Gauss-Legendre rule of order n (computed once, cached).
const GlRule& gl_rule(int n);

template <class F>
double gl_integrate(F&& f, double a, double b, int n = 32) {
    const GlRule& r = gl_rule(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Kahan acc;
    for (size_t i = 0; i < r.x.size(); ++i) acc.add(r.w[i] * f(mid + half * r.x[i]));
    return acc.get() * half;
}

// Composite GL with panels graded dyadically toward `a`; absorbs mild
// endpoint singularities (x^p with p > -1).
template <class F>
double gl_graded(F&& f, double a, double b, int panels = 12, int n = 16) {
    if (b <= a) return 0.0;
    double total = 0.0;
    double hi = b;
    for (int k = 0; k < panels; ++k) {
        double lo = (k + 1 == panels) ? a : a + (b - a) * std::ldexp(1.0, -(k + 1));
        total += gl_integrate(f, lo, hi, n);
        hi = lo;
    }
    return total;
}

// Deterministic chunked reduction: the partition into chunks is fixed, so the
// result is bit-identical for any thread count (and equals the serial path).
template <class F>
double par_sum(int64_t n, F&& f, bool parallel = true) {
    if (n <= 0) return 0.0;
    const int64_t nc = std::min<int64_t>(1024, n);
    std::vector<double> part(size_t(nc), 0.0);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int64_t ci = 0; ci < nc; ++ci) {
        int64_t lo = n * ci / nc, hi = n * (ci + 1) / nc;
        Kahan k;
        for (int64_t i = lo; i < hi; ++i) k.add(f(i));
        part[size_t(ci)] = k.get();
    }
    Kahan tot;
    for (double p : part) tot.add(p);
    return tot.get();
}

// sum_{x=a}^{inf} x^{-s} for s > 1, Euler-Maclaurin corrected.
double pow_tail(double a, double s);

// sum_{x=a}^{b} (q + x^2)^{-s/2}; pass b < 0 for an infinite upper limit.
// Exact near part plus Euler-Maclaurin tail; relative error ~1e-12.
double offset_power_sum(double q, int64_t a, int64_t b, double s);

// I_s(y) = integral_0^y (1+t^2)^{-s/2} dt  (y may be infinite: y < 0)
double half_integral(double y, double s);

// integral_P^inf cos(k r) r^{-s} dr by repeated integration by parts (k != 0)
double osc_cos_tail(double P, double k, double s);
// integral_P^inf sin(k r) r^{-s} dr
double osc_sin_tail(double P, double k, double s);

} // namespace tagex::num
