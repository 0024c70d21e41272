#include "tagex/rwalk.hpp"

#include <algorithm>
#include <cmath>

#include "tagex/linalg.hpp"
#include "tagex/numerics.hpp"

namespace tagex {

using num::Kahan;

WalkSpec WalkSpec::make(int d, double alpha, int64_t near_radius) {
    KernelSpec ks{d, alpha, 1};
    ks.validate();
    WalkSpec w;
    w.d = d;
    w.alpha = alpha;
    w.s_star_value = s_star(ks).value;
    if (near_radius <= 0) near_radius = (d == 1) ? 2000 : (d == 2 ? 200 : 26);
    w.near_radius = near_radius;
    const int64_t R = near_radius, R2 = R * R;
    const double s = d + alpha;
    const int64_t ylim = (d >= 2) ? R : 0, zlim = (d >= 3) ? R : 0;
    Kahan mass;
    // lexicographic half-space; the mirror image enters through the weight 2
    for (int64_t a = -R; a <= R; ++a)
        for (int64_t b = -ylim; b <= ylim; ++b)
            for (int64_t c = -zlim; c <= zlim; ++c) {
                if (!(a > 0 || (a == 0 && b > 0) || (a == 0 && b == 0 && c > 0))) continue;
                int64_t n2 = a * a + b * b + c * c;
                if (n2 > R2) continue;
                w.near_pts.push_back({int32_t(a), int32_t(b), int32_t(c)});
                w.near_w.push_back(2.0 * std::pow(double(n2), -0.5 * s));
                mass.add(w.near_w.back());
            }
    w.near_mass = mass.get();
    return w;
}

// integral_e^inf (1 - cos(k rho)) rho^{-1-alpha} d rho
static double radial_one_minus_cos(double e, double k, double alpha) {
    if (k == 0.0) return 0.0;
    double P = std::max(e, std::max(32.0, 8.0 / k));
    Kahan head;
    if (P > e) {
        int n = std::max(4, int((P - e) * k / 1.5) + 1);
        double lo = e;
        for (int i = 0; i < n; ++i) {
            double hi = e + (P - e) * double(i + 1) / n;
            head.add(num::gl_integrate(
                [&](double r) { return (1.0 - std::cos(k * r)) * std::pow(r, -1.0 - alpha); }, lo, hi, 16));
            lo = hi;
        }
    }
    return head.get() + std::pow(P, -alpha) / alpha - num::osc_cos_tail(P, k, 1.0 + alpha);
}

// J(e) = integral_{||w|| > e} (1 - cos w1) ||w||^{-d-alpha} dw
static double far_integral(double e, int d, double alpha) {
    if (d == 1) return 2.0 * radial_one_minus_cos(e, 1.0, alpha);
    if (d == 2) {
        return 4.0 * num::gl_integrate([&](double psi) { return radial_one_minus_cos(e, std::cos(psi), alpha); }, 0.0,
                                       M_PI_2, 32);
    }
    return 4.0 * M_PI *
           num::gl_integrate([&](double mu) { return radial_one_minus_cos(e, mu, alpha); }, 0.0, 1.0, 32);
}

double one_minus_phi(const std::array<double, 3>& theta, const WalkSpec& spec) {
    double t2 = 0.0;
    for (int j = 0; j < spec.d; ++j) t2 += theta[size_t(j)] * theta[size_t(j)];
    double tn = std::sqrt(t2);
    if (tn == 0.0) return 0.0;
    Kahan near;
    const size_t n = spec.near_pts.size();
    for (size_t i = 0; i < n; ++i) {
        const auto& p = spec.near_pts[i];
        double ph = 0.5 * (theta[0] * p[0] + theta[1] * p[1] + theta[2] * p[2]);
        double sn = std::sin(ph);
        near.add(spec.near_w[i] * 2.0 * sn * sn);
    }
    double e = tn * (double(spec.near_radius) + 0.5);
    double tail;
    if (e < 6.0) {
        tail = std::pow(tn, spec.alpha) * far_integral(e, spec.d, spec.alpha);
    } else {
        // beyond the oscillation scale the cosine sum averages out; keep the
        // tail mass and absorb the remainder in the evaluator error
        tail = std::max(0.0, spec.s_star_value - spec.near_mass);
    }
    return (near.get() + tail) / spec.s_star_value;
}

std::pair<double, double> char_fn_truncated(const std::array<double, 3>& theta, const WalkSpec& spec, int64_t radius) {
    const double s = spec.d + spec.alpha;
    const int64_t R = radius, R2 = R * R;
    const int64_t ylim = (spec.d >= 2) ? R : 0, zlim = (spec.d >= 3) ? R : 0;
    double phi = num::par_sum(2 * R + 1, [&](int64_t ia) {
        int64_t a = ia - R;
        Kahan acc;
        for (int64_t b = -ylim; b <= ylim; ++b)
            for (int64_t c = -zlim; c <= zlim; ++c) {
                if (a == 0 && b == 0 && c == 0) continue;
                int64_t n2 = a * a + b * b + c * c;
                if (n2 > R2) continue;
                acc.add(std::cos(theta[0] * double(a) + theta[1] * double(b) + theta[2] * double(c)) *
                        std::pow(double(n2), -0.5 * s));
            }
        return acc.get();
    });
    // tail-mass bound on the dropped part
    double bound;
    if (spec.d == 1) bound = 2.0 * num::pow_tail(double(R + 1), s);
    else if (spec.d == 2) bound = 2.0 * M_PI / spec.alpha * std::pow(double(R), -spec.alpha) * 1.3;
    else bound = 4.0 * M_PI / spec.alpha * std::pow(double(R), -spec.alpha) * 1.3;
    return {phi / spec.s_star_value, bound / spec.s_star_value};
}

static std::vector<std::array<double, 3>> fit_directions(int d) {
    std::vector<std::array<double, 3>> dirs;
    if (d == 1) {
        dirs.push_back({1.0, 0.0, 0.0});
        return dirs;
    }
    const int n = 64;
    if (d == 2) {
        for (int i = 0; i < n; ++i) {
            double a = M_PI * (double(i) + 0.5) / double(n) - M_PI_2;
            dirs.push_back({std::cos(a), std::sin(a), 0.0});
        }
        return dirs;
    }
    // Fibonacci hemisphere
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        double mu = (double(i) + 0.5) / double(n); // omega_1 in (0,1)
        double r = std::sqrt(1.0 - mu * mu);
        dirs.push_back({mu, r * std::cos(ga * i), r * std::sin(ga * i)});
    }
    return dirs;
}

ExponentFit small_theta_exponent(const WalkSpec& spec) {
    ExponentFit fit;
    fit.log_corrected = (spec.alpha == 2.0);
    const int nr = 9;
    std::vector<double> logr(nr), w(nr);
    for (int i = 0; i < nr; ++i) logr[size_t(i)] = std::log(1e-4) + (std::log(1e-2) - std::log(1e-4)) * i / (nr - 1);
    auto dirs = fit_directions(spec.d);
    Kahan mean;
    std::vector<double> slopes;
    double max_resid = 0.0;
    for (const auto& v : dirs) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::vector<double> xs(nr), ys(nr);
        for (int i = 0; i < nr; ++i) {
            double r = std::exp(logr[size_t(i)]);
            std::array<double, 3> th{r * v[0], r * v[1], r * v[2]};
            double y = std::log(one_minus_phi(th, spec));
            if (fit.log_corrected) y -= std::log(std::abs(std::log(r)));
            xs[size_t(i)] = logr[size_t(i)];
            ys[size_t(i)] = y;
            sx += xs[size_t(i)];
            sy += y;
            sxx += xs[size_t(i)] * xs[size_t(i)];
            sxy += xs[size_t(i)] * y;
        }
        double slope = (nr * sxy - sx * sy) / (nr * sxx - sx * sx);
        double icpt = (sy - slope * sx) / nr;
        double rss = 0;
        for (int i = 0; i < nr; ++i) {
            double rres = ys[size_t(i)] - icpt - slope * xs[size_t(i)];
            rss += rres * rres;
        }
        max_resid = std::max(max_resid, std::sqrt(rss / nr));
        slopes.push_back(slope);
        mean.add(slope);
    }
    fit.per_direction = slopes;
    fit.exponent = mean.get() / double(slopes.size());
    double spread = 0.0;
    for (double s : slopes) spread = std::max(spread, std::abs(s - fit.exponent));
    double xvar = 0;
    double xbar = 0;
    for (double x : logr) xbar += x / nr;
    for (double x : logr) xvar += (x - xbar) * (x - xbar);
    fit.ci = spread + 2.0 * max_resid / std::sqrt(xvar);
    if (max_resid / std::sqrt(xvar) > 0.2) throw std::runtime_error("small_theta_exponent: fit residual too large");
    return fit;
}

// shell integral of Re 1/(1-phi) over {r1 <= ||theta|| <= r2}
static double recurrence_shell(const WalkSpec& spec, double r1, double r2) {
    auto f = [&](const std::array<double, 3>& th) { return 1.0 / one_minus_phi(th, spec); };
    if (spec.d == 1) {
        return 2.0 * num::gl_integrate([&](double r) { return f({r, 0, 0}); }, r1, r2, 16);
    }
    if (spec.d == 2) {
        return 4.0 *
               num::gl_integrate(
                   [&](double r) {
                       return r * num::gl_integrate([&](double a) { return f({r * std::cos(a), r * std::sin(a), 0}); },
                                                    0.0, M_PI_2, 8);
                   },
                   r1, r2, 12);
    }
    return 8.0 * num::gl_integrate(
                     [&](double r) {
                         double ang = num::gl_integrate(
                             [&](double mu) {
                                 double rr = std::sqrt(1.0 - mu * mu);
                                 return num::gl_integrate(
                                     [&](double ph) {
                                         return f({r * mu, r * rr * std::cos(ph), r * rr * std::sin(ph)});
                                     },
                                     0.0, M_PI_2, 6);
                             },
                             0.0, 1.0, 6);
                         return r * r * ang;
                     },
                     r1, r2, 8);
}

Classification classify(const WalkSpec& spec) {
    Classification cl;
    cl.value = (spec.d <= 2 && spec.alpha >= double(spec.d)) ? WalkClass::Recurrent : WalkClass::Transient;
    const double delta = 0.4;
    for (int k = 0; k < 6; ++k)
        cl.shell_integrals.push_back(recurrence_shell(spec, delta * std::ldexp(1.0, -(k + 1)), delta * std::ldexp(1.0, -k)));
    size_t n = cl.shell_integrals.size();
    cl.trend_ratio = cl.shell_integrals[n - 1] / cl.shell_integrals[n - 2];
    return cl;
}

// product Gauss-Legendre over dyadic sup-norm shells of [0,pi]^d
static double green_quad(const WalkSpec& spec, int shells, int gl) {
    struct Box {
        double lo[3], hi[3];
    };
    auto box_integral = [&](const Box& b) {
        const auto& rule = num::gl_rule(gl);
        const size_t m = rule.x.size();
        double acc = 0.0;
        if (spec.d == 1) {
            for (size_t i = 0; i < m; ++i) {
                double x = 0.5 * (b.lo[0] + b.hi[0]) + 0.5 * (b.hi[0] - b.lo[0]) * rule.x[i];
                acc += rule.w[i] / one_minus_phi({x, 0, 0}, spec);
            }
            return acc * 0.5 * (b.hi[0] - b.lo[0]);
        }
        if (spec.d == 2) {
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < m; ++j) {
                    double x = 0.5 * (b.lo[0] + b.hi[0]) + 0.5 * (b.hi[0] - b.lo[0]) * rule.x[i];
                    double y = 0.5 * (b.lo[1] + b.hi[1]) + 0.5 * (b.hi[1] - b.lo[1]) * rule.x[j];
                    acc += rule.w[i] * rule.w[j] / one_minus_phi({x, y, 0}, spec);
                }
            return acc * 0.25 * (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]);
        }
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < m; ++j)
                for (size_t k = 0; k < m; ++k) {
                    double x = 0.5 * (b.lo[0] + b.hi[0]) + 0.5 * (b.hi[0] - b.lo[0]) * rule.x[i];
                    double y = 0.5 * (b.lo[1] + b.hi[1]) + 0.5 * (b.hi[1] - b.lo[1]) * rule.x[j];
                    double z = 0.5 * (b.lo[2] + b.hi[2]) + 0.5 * (b.hi[2] - b.lo[2]) * rule.x[k];
                    acc += rule.w[i] * rule.w[j] * rule.w[k] / one_minus_phi({x, y, z}, spec);
                }
        return acc * 0.125 * (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]) * (b.hi[2] - b.lo[2]);
    };

    std::vector<Box> boxes;
    double hi = M_PI;
    for (int k = 0; k < shells; ++k) {
        double lo = hi * 0.5;
        if (spec.d == 1) {
            boxes.push_back({{lo, 0, 0}, {hi, 0, 0}});
        } else if (spec.d == 2) {
            boxes.push_back({{lo, 0, 0}, {hi, lo, 0}});
            boxes.push_back({{0, lo, 0}, {lo, hi, 0}});
            boxes.push_back({{lo, lo, 0}, {hi, hi, 0}});
        } else {
            for (int mx = 0; mx < 2; ++mx)
                for (int my = 0; my < 2; ++my)
                    for (int mz = 0; mz < 2; ++mz) {
                        if (!mx && !my && !mz) continue;
                        Box b;
                        b.lo[0] = mx ? lo : 0;
                        b.hi[0] = mx ? hi : lo;
                        b.lo[1] = my ? lo : 0;
                        b.hi[1] = my ? hi : lo;
                        b.lo[2] = mz ? lo : 0;
                        b.hi[2] = mz ? hi : lo;
                        boxes.push_back(b);
                    }
        }
        hi = lo;
    }
    std::vector<double> parts(boxes.size());
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < int64_t(boxes.size()); ++i) parts[size_t(i)] = box_integral(boxes[size_t(i)]);
    Kahan total;
    for (double p : parts) total.add(p);
    // inside the last shell substitute the small-theta law 1-phi ~ c r^alpha
    // and keep tiling the same dyadic boxes until the remainder vanishes
    double eps = hi;
    double c_est = one_minus_phi({eps, 0, 0}, spec) / std::pow(eps, spec.alpha);
    auto model_box = [&](const Box& b) {
        const auto& rule = num::gl_rule(8);
        const size_t m = rule.x.size();
        double acc = 0.0;
        auto mf = [&](double x, double y, double z) {
            return 1.0 / (c_est * std::pow(x * x + y * y + z * z, 0.5 * spec.alpha));
        };
        if (spec.d == 1) {
            for (size_t i = 0; i < m; ++i)
                acc += rule.w[i] * mf(0.5 * (b.lo[0] + b.hi[0]) + 0.5 * (b.hi[0] - b.lo[0]) * rule.x[i], 0, 0);
            return acc * 0.5 * (b.hi[0] - b.lo[0]);
        }
        if (spec.d == 2) {
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < m; ++j)
                    acc += rule.w[i] * rule.w[j] *
                           mf(0.5 * (b.lo[0] + b.hi[0]) + 0.5 * (b.hi[0] - b.lo[0]) * rule.x[i],
                              0.5 * (b.lo[1] + b.hi[1]) + 0.5 * (b.hi[1] - b.lo[1]) * rule.x[j], 0);
            return acc * 0.25 * (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]);
        }
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < m; ++j)
                for (size_t k = 0; k < m; ++k)
                    acc += rule.w[i] * rule.w[j] * rule.w[k] *
                           mf(0.5 * (b.lo[0] + b.hi[0]) + 0.5 * (b.hi[0] - b.lo[0]) * rule.x[i],
                              0.5 * (b.lo[1] + b.hi[1]) + 0.5 * (b.hi[1] - b.lo[1]) * rule.x[j],
                              0.5 * (b.lo[2] + b.hi[2]) + 0.5 * (b.hi[2] - b.lo[2]) * rule.x[k]);
        return acc * 0.125 * (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]) * (b.hi[2] - b.lo[2]);
    };
    double h2 = eps;
    for (int k = 0; k < 400; ++k) {
        double lo = h2 * 0.5;
        double shell = 0.0;
        if (spec.d == 1) {
            shell += model_box({{lo, 0, 0}, {h2, 0, 0}});
        } else if (spec.d == 2) {
            shell += model_box({{lo, 0, 0}, {h2, lo, 0}});
            shell += model_box({{0, lo, 0}, {lo, h2, 0}});
            shell += model_box({{lo, lo, 0}, {h2, h2, 0}});
        } else {
            for (int mx = 0; mx < 2; ++mx)
                for (int my = 0; my < 2; ++my)
                    for (int mz = 0; mz < 2; ++mz) {
                        if (!mx && !my && !mz) continue;
                        Box b;
                        b.lo[0] = mx ? lo : 0;
                        b.hi[0] = mx ? h2 : lo;
                        b.lo[1] = my ? lo : 0;
                        b.hi[1] = my ? h2 : lo;
                        b.lo[2] = mz ? lo : 0;
                        b.hi[2] = mz ? h2 : lo;
                        shell += model_box(b);
                    }
        }
        total.add(shell);
        h2 = lo;
        if (shell < 1e-14 * std::abs(total.get())) break;
    }
    double octant = total.get();
    double full = octant * std::ldexp(1.0, spec.d); // reflection symmetry
    return full / std::pow(2.0 * M_PI, spec.d);
}

GreenResult green_g00(const WalkSpec& spec) {
    if (classify(spec).value == WalkClass::Recurrent)
        throw std::domain_error("green_g00: walk is recurrent, g(0,0) diverges");
    GreenResult g;
    g.coarse = green_quad(spec, 22, spec.d == 3 ? 5 : 10);
    g.value = green_quad(spec, 26, spec.d == 3 ? 7 : 14);
    g.rel_change = std::abs(g.value - g.coarse) / std::abs(g.value);
    return g;
}

double resolvent_identity_residual(const WalkSpec& spec, int64_t L, double lambda) {
    int64_t n = 1;
    for (int j = 0; j < spec.d; ++j) n *= L;
    if (n > 5000) throw ResourceError("resolvent_identity_residual: torus too large for a dense solve");
    const double s = spec.d + spec.alpha;
    // wrapped step weights over representatives in (-L/2, L/2]
    auto wrap = [&](int64_t a) {
        int64_t r = ((a % L) + L) % L;
        return (r > L / 2) ? r - L : r;
    };
    auto coords = [&](int64_t site) {
        std::array<int64_t, 3> c{0, 0, 0};
        int64_t rem = site;
        for (int j = 0; j < spec.d; ++j) {
            c[size_t(j)] = rem % L;
            rem /= L;
        }
        return c;
    };
    la::DenseD A{int(n)};
    for (int64_t x = 0; x < n; ++x) {
        auto cx = coords(x);
        double diag = 0.0;
        for (int64_t y = 0; y < n; ++y) {
            if (x == y) continue;
            auto cy = coords(y);
            int64_t w0 = wrap(cy[0] - cx[0]), w1 = wrap(cy[1] - cx[1]), w2 = wrap(cy[2] - cx[2]);
            double n2 = double(w0 * w0 + w1 * w1 + w2 * w2);
            double rate = std::pow(n2, -0.5 * s) / spec.s_star_value;
            A(int(x), int(y)) = rate;
            diag += rate;
        }
        A(int(x), int(x)) = -diag;
    }
    // solve (lambda - A) g = delta_0
    la::DenseD M{int(n)};
    for (int i = 0; i < int(n); ++i)
        for (int j = 0; j < int(n); ++j) M(i, j) = ((i == j) ? lambda : 0.0) - A(i, j);
    std::vector<double> rhs(size_t(n), 0.0);
    rhs[0] = 1.0;
    auto g = la::solve(M, rhs);
    double worst = 0.0;
    for (int64_t x = 0; x < n; ++x) {
        double acc = 0.0;
        for (int64_t y = 0; y < n; ++y)
            if (y != x) acc += A(int(x), int(y)) * (g[size_t(y)] - g[size_t(x)]);
        double want = lambda * g[size_t(x)] - ((x == 0) ? 1.0 : 0.0);
        worst = std::max(worst, std::abs(acc - want));
    }
    return worst;
}

} // namespace tagex
