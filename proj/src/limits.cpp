#include "tagex/limits.hpp"

#include <algorithm>
#include <cmath>
#include <vector>
#include <map>
#include <mutex>

#include "tagex/numerics.hpp"

namespace tagex {

using cplx = std::complex<double>;
static constexpr double kEulerGamma = 0.5772156649015328606;

double RegimeScaling::timescale(double N) const {
    switch (tag) {
        case Regime::Sub:
        case Regime::Super: return std::pow(N, alpha);
        case Regime::Critical: return N;
        case Regime::Diffusive: return N * N / std::log(N);
    }
    return 0.0;
}

std::array<double, 3> RegimeScaling::centering(double t, double N, double rho) const {
    std::array<double, 3> c{0, 0, 0};
    if (tag == Regime::Sub) return c;
    if (tag == Regime::Critical) {
        auto ds = drift_sum(int64_t(std::llround(N)), spec);
        for (int j = 0; j < spec.d; ++j) c[size_t(j)] = t * N * (1.0 - rho) * ds[size_t(j)];
        return c;
    }
    double g = timescale(N);
    for (int j = 0; j < spec.d; ++j) c[size_t(j)] = t * g * (1.0 - rho) * m[size_t(j)];
    return c;
}

double RegimeScaling::lln_horizon(double t, double N) const {
    if (tag == Regime::Critical) return t * N / std::log(N);
    return t * N;
}

std::array<double, 3> RegimeScaling::lln_limit(double t, double rho) const {
    std::array<double, 3> v{0, 0, 0};
    if (tag == Regime::Critical) {
        v[0] = t * (1.0 - rho) * gamma_d_value;
    } else if (tag == Regime::Super || tag == Regime::Diffusive) {
        for (int j = 0; j < spec.d; ++j) v[size_t(j)] = t * (1.0 - rho) * m[size_t(j)];
    }
    return v;
}

std::array<double, 3> RegimeScaling::lln_limit_literal() const {
    std::array<double, 3> v{0, 0, 0};
    if (tag == Regime::Critical) v[0] = gamma_d_value;
    return v;
}

RegimeScaling regime_for(double alpha, const KernelSpec& spec) {
    if (!(alpha > 0.0)) throw RegimeError("regime_for: alpha must be positive");
    if (alpha > 2.0) throw RegimeError("regime_for: alpha > 2 is out of scope");
    RegimeScaling r;
    r.alpha = alpha;
    r.spec = spec;
    r.spec.alpha = alpha;
    if (alpha < 1.0) {
        r.tag = Regime::Sub;
    } else if (alpha == 1.0) {
        r.tag = Regime::Critical;
        r.gamma_d_value = gamma_d(r.spec).value;
    } else {
        r.tag = (alpha < 2.0) ? Regime::Super : Regime::Diffusive;
        auto m = mean_m(r.spec);
        for (int j = 0; j < 3; ++j) r.m[size_t(j)] = m[size_t(j)].value;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Radial profiles
// ---------------------------------------------------------------------------

std::complex<double> radial_profile(double s_arg, double alpha) {
    if (s_arg == 0.0) return {0.0, 0.0};
    double as = std::abs(s_arg), sg = (s_arg > 0) ? 1.0 : -1.0;
    if (alpha == 1.0) {
        // real part -pi |s|/2; imaginary part s (1 - gamma_E - log|s|) with the
        // unit-ball compensator
        return {-M_PI_2 * as, s_arg * (1.0 - kEulerGamma - std::log(as))};
    }
    double g = std::tgamma(-alpha);
    double mod = g * std::pow(as, alpha);
    double ang = -sg * M_PI_2 * alpha;
    return {mod * std::cos(ang), mod * std::sin(ang)};
}

static cplx radial_profile_quad_unit(double u, double alpha);

std::complex<double> radial_profile_quad(double s_arg, double alpha) {
    if (s_arg == 0.0) return {0.0, 0.0};
    // rescale the radial variable to unit frequency; exact substitution, with
    // the usual log anomaly of the critical compensator
    static std::mutex mu;
    static std::map<std::pair<double, bool>, cplx> cache;
    const double as = std::abs(s_arg);
    const bool pos = (s_arg > 0);
    cplx base;
    {
        std::lock_guard<std::mutex> lk(mu);
        auto key = std::make_pair(alpha, pos);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, radial_profile_quad_unit(pos ? 1.0 : -1.0, alpha)).first;
        base = it->second;
    }
    if (alpha == 1.0) return as * base - cplx(0.0, s_arg * std::log(as));
    return std::pow(as, alpha) * base;
}

static cplx radial_profile_quad_unit(double u, double alpha) {
    const double au = std::abs(u);
    const double X = std::max(64.0, 16.0 / au);
    const double split = std::min(1.0 / au, 1.0);

    auto osc_panels = [&](auto&& f, double lo, double hi) {
        // panel width at most a quarter oscillation period
        int n = std::max(8, int((hi - lo) / std::min(1.0, 1.5 / au)) + 1);
        double acc_re = 0, acc_im = 0, a0 = lo;
        for (int i = 0; i < n; ++i) {
            double b0 = lo + (hi - lo) * double(i + 1) / n;
            acc_re += num::gl_integrate([&](double r) { return f(r).real(); }, a0, b0, 16);
            acc_im += num::gl_integrate([&](double r) { return f(r).imag(); }, a0, b0, 16);
            a0 = b0;
        }
        return cplx{acc_re, acc_im};
    };

    // near piece with r = y^2 and the sine fully compensated; the linear term
    // re-enters through one closed power integral, which covers alpha < 1
    // (comp on [0,split]) and alpha > 1 (comp on [split,inf)) alike
    auto near_f = [&](double y) -> cplx {
        double r = y * y, p = u * r;
        double sh = std::sin(0.5 * p);
        double c = -2.0 * sh * sh, s = std::sin(p) - p;
        double w = 2.0 * std::pow(y, -1.0 - 2.0 * alpha);
        return {c * w, s * w};
    };
    cplx out = osc_panels(near_f, 1e-9, std::sqrt(split));

    auto far_f = [&](double r) -> cplx {
        double p = u * r, w = std::pow(r, -1.0 - alpha);
        return {(std::cos(p) - 1.0) * w, std::sin(p) * w};
    };
    cplx far = osc_panels(far_f, split, X);
    double re = out.real() + far.real() - std::pow(X, -alpha) / alpha + num::osc_cos_tail(X, u, 1.0 + alpha);
    double im;
    if (alpha != 1.0) {
        im = out.imag() + far.imag() + num::osc_sin_tail(X, u, 1.0 + alpha) +
             u * std::pow(split, 1.0 - alpha) / (1.0 - alpha);
    } else {
        // alpha = 1: compensator only on r <= 1
        auto im_near = [&](double y) {
            double r = y * y, p = u * r;
            return 2.0 * (std::sin(p) - p) * std::pow(y, -3.0);
        };
        im = num::gl_graded(im_near, 0.0, 1.0, 20, 16);
        auto im_far = [&](double r) { return std::sin(u * r) * std::pow(r, -2.0); };
        int n = std::max(8, int((X - 1.0) / std::min(1.0, 1.5 / au)) + 1);
        double lo = 1.0;
        for (int i = 0; i < n; ++i) {
            double hi = 1.0 + (X - 1.0) * double(i + 1) / n;
            im += num::gl_integrate(im_far, lo, hi, 16);
            lo = hi;
        }
        im += num::osc_sin_tail(X, u, 2.0);
    }
    return {re, im};
}

// ---------------------------------------------------------------------------
// Hemisphere integration of the radial profile
// ---------------------------------------------------------------------------

LevyExponent LevyExponent::make(double alpha, int d, std::array<double, 3> a, double rho) {
    LevyExponent ex;
    ex.alpha = alpha;
    ex.d = d;
    ex.a = a;
    ex.rho = rho;
    if (alpha == 2.0) {
        KernelSpec spec{d, 2.0, 1};
        ex.D = D_matrix(spec);
    }
    return ex;
}

static cplx psi_eval(double s_arg, const LevyExponent& ex) {
    return (ex.method == LevyExponent::Method::RadialQuad) ? radial_profile_quad(s_arg, ex.alpha)
                                                           : radial_profile(s_arg, ex.alpha);
}

// integrate f over [lo,hi] with dyadic grading toward both ends (the radial
// profile has a |s|^alpha kink where the direction crosses a.omega = 0)
template <class F>
static cplx graded_both(F&& f, double lo, double hi, int panels, int n) {
    double mid = 0.5 * (lo + hi);
    cplx out{0, 0};
    auto run = [&](double a0, double b0) {
        out += cplx{num::gl_integrate([&](double x) { return f(x).real(); }, a0, b0, n),
                    num::gl_integrate([&](double x) { return f(x).imag(); }, a0, b0, n)};
    };
    // left half: panels shrink toward lo
    double w = mid - lo, edge = mid;
    for (int k = 0; k < panels; ++k) {
        double a0 = (k + 1 == panels) ? lo : lo + w * std::ldexp(1.0, -(k + 1));
        run(a0, edge);
        edge = a0;
    }
    // right half: panels shrink toward hi
    double w2 = hi - mid;
    edge = mid;
    for (int k = 0; k < panels; ++k) {
        double b0 = (k + 1 == panels) ? hi : hi - w2 * std::ldexp(1.0, -(k + 1));
        run(edge, b0);
        edge = b0;
    }
    return out;
}

std::complex<double> phi(double beta, const LevyExponent& ex) {
    if (!(ex.alpha > 0.0) || ex.alpha > 2.0) throw RegimeError("phi: alpha must lie in (0,2]");
    if (beta == 0.0) return {0.0, 0.0};
    if (ex.alpha == 2.0) {
        if (ex.D.d != ex.d) throw std::invalid_argument("phi: D matrix dimension mismatch");
        double q = 0.0;
        for (int i = 0; i < ex.d; ++i)
            for (int j = 0; j < ex.d; ++j) q += ex.a[size_t(i)] * ex.D.v[i][j] * ex.a[size_t(j)];
        return {-0.5 * beta * beta * q, 0.0};
    }
    if (ex.d == 1) return psi_eval(beta * ex.a[0], ex);
    if (ex.d == 2) {
        // omega = (cos t, sin t), t in (-pi/2, pi/2); kink where a.omega = 0
        auto f = [&](double t) { return psi_eval(beta * (ex.a[0] * std::cos(t) + ex.a[1] * std::sin(t)), ex); };
        double amp = std::hypot(ex.a[0], ex.a[1]);
        if (amp == 0.0) return {0.0, 0.0};
        double t0 = std::atan2(-ex.a[0], ex.a[1]); // root of a1 cos + a2 sin
        if (t0 <= -M_PI_2 || t0 >= M_PI_2) t0 = std::atan2(ex.a[0], -ex.a[1]);
        cplx out{0, 0};
        if (t0 > -M_PI_2 && t0 < M_PI_2) {
            auto left = graded_both(f, -M_PI_2, t0, 28, 16);
            auto right = graded_both(f, t0, M_PI_2, 28, 16);
            out = left + right;
        } else {
            out = graded_both(f, -M_PI_2, M_PI_2, 28, 16);
        }
        return out;
    }
    // d = 3: omega = (cos T, sin T cos p, sin T sin p), surface element sin T
    auto inner = [&](double T) -> cplx {
        double cT = std::cos(T), sT = std::sin(T);
        auto f = [&](double p) {
            return psi_eval(beta * (ex.a[0] * cT + sT * (ex.a[1] * std::cos(p) + ex.a[2] * std::sin(p))), ex);
        };
        // roots of c0 + A cos(p - p0) in [0, 2pi)
        double c0 = ex.a[0] * cT, A = sT * std::hypot(ex.a[1], ex.a[2]);
        std::vector<double> cuts{0.0, 2.0 * M_PI};
        if (A > 0.0 && std::abs(c0) < A) {
            double p0 = std::atan2(ex.a[2], ex.a[1]);
            double dp = std::acos(-c0 / A);
            for (double r : {p0 + dp, p0 - dp}) {
                double rr = std::fmod(std::fmod(r, 2.0 * M_PI) + 2.0 * M_PI, 2.0 * M_PI);
                cuts.push_back(rr);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        cplx acc{0, 0};
        for (size_t i = 0; i + 1 < cuts.size(); ++i)
            if (cuts[i + 1] > cuts[i] + 1e-14) acc += graded_both(f, cuts[i], cuts[i + 1], 20, 12);
        return acc * sT;
    };
    cplx out{0, 0};
    const auto& rule = num::gl_rule(48);
    for (size_t i = 0; i < rule.x.size(); ++i) {
        double T = M_PI_4 * (rule.x[i] + 1.0);
        out += rule.w[i] * inner(T);
    }
    return out * M_PI_4;
}

std::complex<double> levy_cf(double beta, double t, const LevyExponent& ex) {
    cplx e = t * (1.0 - ex.rho) * phi(beta, ex);
    return std::exp(e);
}

} // namespace tagex
