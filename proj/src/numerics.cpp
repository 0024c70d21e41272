#include "tagex/numerics.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace tagex::num {

static GlRule make_gl(int n) {
    GlRule r;
    r.x.resize(size_t(n));
    r.w.resize(size_t(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double p0, p1, dp;
        for (int it = 0; it < 100; ++it) {
            p0 = 1.0;
            p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.x[size_t(i)] = -x;
        r.x[size_t(n - 1 - i)] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.w[size_t(i)] = w;
        r.w[size_t(n - 1 - i)] = w;
    }
    return r;
}

const GlRule& gl_rule(int n) {
    static std::mutex mu;
    static std::map<int, GlRule> cache;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gl(n)).first;
    return it->second;
}

double pow_tail(double a, double s) {
    if (s <= 1.0) throw std::domain_error("pow_tail requires s > 1");
    // exact head up to K, Euler-Maclaurin beyond
    const int64_t K = std::max<int64_t>(int64_t(a), 48);
    Kahan head;
    for (int64_t x = int64_t(a); x < K; ++x) head.add(std::pow(double(x), -s));
    double k = double(K);
    double em = std::pow(k, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(k, -s) + s / 12.0 * std::pow(k, -s - 1.0) -
                s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(k, -s - 3.0) +
                s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 * std::pow(k, -s - 5.0);
    return head.get() + em;
}

double half_integral(double y, double s) {
    const bool inf = (y < 0);
    // closed forms for the integer exponents that dominate the hot paths
    if (s == 2.0) return inf ? M_PI_2 : std::atan(y);
    if (s == 3.0) return inf ? 1.0 : y / std::sqrt(1.0 + y * y);
    if (s == 4.0) return inf ? M_PI_4 : 0.5 * (std::atan(y) + y / (1.0 + y * y));
    if (s == 5.0) return inf ? (2.0 / 3.0) : y * (3.0 + 2.0 * y * y) / (3.0 * std::pow(1.0 + y * y, 1.5));
    const double full = 0.5 * std::sqrt(M_PI) * std::tgamma(0.5 * (s - 1.0)) / std::tgamma(0.5 * s);
    if (inf) return full;
    if (y <= 1.0) return gl_integrate([&](double t) { return std::pow(1.0 + t * t, -0.5 * s); }, 0.0, y, 64);
    // integral_y^inf via t = 1/u: integrand u^{s-2}(1+u^2)^{-s/2} on (0, 1/y].
    // The power substitution u = v^p with p = 2/(s-1) turns u^{s-2} du into
    // v dv, removing the endpoint singularity entirely when s <= 3.
    double tail;
    if (s <= 3.0) {
        double p = 2.0 / (s - 1.0);
        double V = std::pow(1.0 / y, 1.0 / p);
        tail = p * gl_integrate(
                       [&](double v) {
                           double u = std::pow(v, p);
                           return v * std::pow(1.0 + u * u, -0.5 * s);
                       },
                       0.0, V, 64);
    } else {
        // u = v^2: integrand 2 v^{2s-3} (1+v^4)^{-s/2}, graded toward 0
        double V = std::sqrt(1.0 / y);
        tail = gl_graded(
            [&](double v) {
                double u = v * v;
                return 2.0 * std::pow(v, 2.0 * s - 3.0) * std::pow(1.0 + u * u, -0.5 * s);
            },
            0.0, V, 20, 16);
    }
    return full - tail;
}

double offset_power_sum(double q, int64_t a, int64_t b, double s) {
    if (q < 0 || a < 0) throw std::invalid_argument("offset_power_sum: q >= 0, a >= 0 required");
    const bool inf = (b < 0);
    if (!inf && b < a) return 0.0;
    auto T = [&](double x) { return std::pow(q + x * x, -0.5 * s); };
    // exact near part where the summand varies on unit scale
    int64_t X;
    if (q >= 2500.0) {
        X = a - 1; // summand smooth from the start
    } else {
        X = std::max<int64_t>(a - 1, 48 + 2 * int64_t(std::sqrt(q)));
        if (!inf) X = std::min(X, b);
    }
    Kahan head;
    for (int64_t x = a; x <= X; ++x) head.add(T(double(x)));
    if (!inf && X >= b) return head.get();

    const double lo = double(X + 1);
    const double m = 0.5 * s;
    auto Tp = [&](double x) {
        double v = q + x * x;
        return -2.0 * m * x * std::pow(v, -m - 1.0);
    };
    auto Tppp = [&](double x) {
        double v = q + x * x;
        return 12.0 * m * (m + 1.0) * x * std::pow(v, -m - 2.0) -
               8.0 * m * (m + 1.0) * (m + 2.0) * x * x * x * std::pow(v, -m - 3.0);
    };
    double integral;
    if (q == 0.0) {
        double hi_part = inf ? 0.0 : std::pow(double(b), 1.0 - s);
        integral = (std::pow(lo, 1.0 - s) - hi_part) / (s - 1.0);
    } else {
        double rq = std::sqrt(q);
        double Ihi = half_integral(inf ? -1.0 : double(b) / rq, s);
        double Ilo = half_integral(lo / rq, s);
        integral = std::pow(q, 0.5 * (1.0 - s)) * (Ihi - Ilo);
    }
    double Thi = inf ? 0.0 : T(double(b));
    double Tphi = inf ? 0.0 : Tp(double(b));
    double Tp3hi = inf ? 0.0 : Tppp(double(b));
    double em = integral + 0.5 * (T(lo) + Thi) + (Tphi - Tp(lo)) / 12.0 - (Tp3hi - Tppp(lo)) / 720.0;
    return head.get() + em;
}

// Integration by parts gains a factor (s+n)/(kP) per level; the series is
// asymptotic, so kP must be pushed well past s by numeric panels first.
static double osc_tail_impl(double P, double k, double s, bool is_cos, int depth) {
    double ak = std::abs(k);
    if (std::pow(P, -s) / ak < 1e-300) return 0.0;
    double need = std::max(40.0, 3.0 * s);
    if (ak * P < need && depth == 0) {
        double Pn = need / ak;
        double bridge = 0.0;
        int panels = std::max(4, int((Pn - P) * ak / 1.5) + 1);
        double lo = P;
        for (int i = 0; i < panels; ++i) {
            double hi = P + (Pn - P) * double(i + 1) / panels;
            bridge += gl_integrate(
                [&](double r) { return (is_cos ? std::cos(k * r) : std::sin(k * r)) * std::pow(r, -s); }, lo, hi, 16);
            lo = hi;
        }
        return bridge + osc_tail_impl(Pn, k, s, is_cos, depth + 1);
    }
    double mag = std::pow(P, -s) / ak;
    if (is_cos) {
        double t1 = -std::sin(k * P) * std::pow(P, -s) / k;
        if (depth > 30 || s / (ak * P) > 0.7 || mag < 1e-19) return t1;
        return t1 + (s / k) * osc_tail_impl(P, k, s + 1.0, false, depth + 1);
    }
    double t1 = std::cos(k * P) * std::pow(P, -s) / k;
    if (depth > 30 || s / (ak * P) > 0.7 || mag < 1e-19) return t1;
    return t1 - (s / k) * osc_tail_impl(P, k, s + 1.0, true, depth + 1);
}

double osc_cos_tail(double P, double k, double s) { return osc_tail_impl(P, k, s, true, 0); }

double osc_sin_tail(double P, double k, double s) { return osc_tail_impl(P, k, s, false, 0); }

} // namespace tagex::num
