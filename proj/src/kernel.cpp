#include "tagex/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "tagex/numerics.hpp"

namespace tagex {

using num::Kahan;
using num::offset_power_sum;
using num::pow_tail;

double eval_p(const Lv& z, const KernelSpec& spec) {
    if (z.d != spec.d) throw std::invalid_argument("eval_p: dimension mismatch");
    if (z.is_zero()) return 0.0;
    if (z[0] < 0) return 0.0;
    double w = (z[0] > 0) ? 2.0 : 1.0;
    return w * std::pow(double(z.norm2()), -0.5 * spec.s());
}

double eval_p_continuous(const std::array<double, 3>& u, const KernelSpec& spec) {
    double n2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    if (n2 == 0.0) return 0.0;
    if (u[0] < 0.0) return 0.0;
    double w = (u[0] > 0.0) ? 2.0 : 1.0;
    return w * std::pow(n2, -0.5 * spec.s());
}

// ---------------------------------------------------------------------------
// Lattice sums. Everything reduces to rows over the first coordinate with
// closed-out inner sums:
//   line_sum(q)  = sum_{x in Z} (q + x^2)^{-s/2}
//   plane_sum(q) = sum_{w in Z^2} (q + |w|^2)^{-s/2}
// Rows far out are replaced by their integral form; the lattice/integral gap
// decays like exp(-2 pi sqrt(q)), so a modest exact window suffices.
// ---------------------------------------------------------------------------

static double line_sum(double q, double s) {
    return offset_power_sum(q, 0, -1, s) + offset_power_sum(q, 1, -1, s);
}

static double line_sum_bounded(double q, int64_t M, double s) {
    if (M < 0) return 0.0;
    return offset_power_sum(q, 0, M, s) + offset_power_sum(q, 1, M, s);
}

// 2 * I_s(inf): full-line integral constant, line_sum(q) ~ ci(s) * q^{(1-s)/2}
static double ci(double s) { return 2.0 * num::half_integral(-1.0, s); }

static double plane_sum(double q, double s) {
    Kahan tot;
    tot.add(line_sum(q, s));
    const int Y = 24;
    for (int y = 1; y <= Y; ++y) tot.add(2.0 * line_sum(q + double(y) * y, s));
    tot.add(2.0 * ci(s) * offset_power_sum(q, Y + 1, -1, s - 1.0));
    return tot.get();
}

static double plane_sum_bounded(double q, double B, double s) {
    // sum over w in Z^2 with |w|^2 <= B
    if (B < 0) return 0.0;
    int64_t Y = int64_t(std::sqrt(B));
    while (double(Y) * double(Y) > B) --Y;
    Kahan tot;
    for (int64_t y = -Y; y <= Y; ++y) {
        double rem = B - double(y) * double(y);
        int64_t M = int64_t(std::sqrt(std::max(0.0, rem)));
        while (double(M) * double(M) > rem) --M;
        tot.add(line_sum_bounded(q + double(y) * double(y), M, s));
    }
    return tot.get();
}

// sum over z in Z^dim \ {0} of ||z||^{-s}
static double norm_power_sum(int dim, double s, int row_cut) {
    if (dim == 1) return pow_tail(1.0, s) + pow_tail(1.0, s);
    if (dim == 2) {
        Kahan tot;
        tot.add(pow_tail(1.0, s) + pow_tail(1.0, s)); // z1 = 0 line
        for (int sign = 0; sign < 2; ++sign) {
            for (int c = 1; c <= row_cut; ++c) tot.add(line_sum(double(c) * c, s));
            tot.add(ci(s) * pow_tail(double(row_cut + 1), s - 1.0));
        }
        return tot.get();
    }
    Kahan tot;
    tot.add(norm_power_sum(2, s, row_cut)); // z1 = 0 plane
    const int C = 24;
    for (int sign = 0; sign < 2; ++sign) {
        for (int c = 1; c <= C; ++c) tot.add(plane_sum(double(c) * c, s));
        tot.add((2.0 * M_PI / (s - 2.0)) * pow_tail(double(C + 1), s - 2.0));
    }
    return tot.get();
}

SumResult s_star(const KernelSpec& spec) {
    spec.validate();
    double s = spec.s();
    double v2 = norm_power_sum(spec.d, s, 64);
    double v1 = norm_power_sum(spec.d, s, 48);
    return {v2, std::abs(v2 - v1) + 1e-12 * (1.0 + std::abs(v2))};
}

SumResult total_rate(const KernelSpec& spec) {
    spec.validate();
    double s = spec.s();
    if (spec.d == 1) {
        double v = 2.0 * pow_tail(1.0, s);
        return {v, 1e-12 * (1.0 + v)};
    }
    auto eval = [&](int row_cut) {
        Kahan tot;
        if (spec.d == 2) {
            tot.add(2.0 * pow_tail(1.0, s)); // z1 = 0 line, weight 1
            for (int c = 1; c <= row_cut; ++c) tot.add(2.0 * line_sum(double(c) * c, s));
            tot.add(2.0 * ci(s) * pow_tail(double(row_cut + 1), s - 1.0));
        } else {
            tot.add(norm_power_sum(2, s, row_cut)); // z1 = 0 plane, weight 1
            const int C = 24;
            for (int c = 1; c <= C; ++c) tot.add(2.0 * plane_sum(double(c) * c, s));
            tot.add(2.0 * (2.0 * M_PI / (s - 2.0)) * pow_tail(double(C + 1), s - 2.0));
        }
        return tot.get();
    };
    double v2 = eval(64), v1 = eval(48);
    return {v2, std::abs(v2 - v1) + 1e-12 * (1.0 + std::abs(v2))};
}

static double s_star_cached(const KernelSpec& spec) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, double> cache;
    std::lock_guard<std::mutex> lk(mu);
    auto key = std::make_pair(spec.d, spec.alpha);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, s_star(spec).value).first;
    return it->second;
}

double eval_s(const Lv& z, const KernelSpec& spec) {
    if (z.d != spec.d) throw std::invalid_argument("eval_s: dimension mismatch");
    if (z.is_zero()) throw std::domain_error("eval_s: z = 0 is outside the step law");
    return std::pow(double(z.norm2()), -0.5 * spec.s()) / s_star_cached(spec);
}

std::array<SumResult, 3> mean_m(const KernelSpec& spec, double tol) {
    spec.validate();
    if (!(spec.alpha > 1.0)) throw RegimeError("mean_m: alpha > 1 required for a finite mean");
    double s = spec.s();
    auto eval = [&](int row_cut) {
        if (spec.d == 1) return 2.0 * pow_tail(1.0, spec.alpha);
        Kahan tot;
        if (spec.d == 2) {
            for (int c = 1; c <= row_cut; ++c) tot.add(2.0 * double(c) * line_sum(double(c) * c, s));
            tot.add(2.0 * ci(s) * pow_tail(double(row_cut + 1), s - 2.0));
        } else {
            const int C = 24;
            for (int c = 1; c <= C; ++c) tot.add(2.0 * double(c) * plane_sum(double(c) * c, s));
            tot.add(2.0 * (2.0 * M_PI / (s - 2.0)) * pow_tail(double(C + 1), s - 3.0));
        }
        return tot.get();
    };
    double v2 = eval(64), v1 = eval(48);
    double err = std::abs(v2 - v1) + 1e-12 * (1.0 + std::abs(v2));
    if (err > tol) throw std::runtime_error("mean_m: requested tolerance not reached");
    std::array<SumResult, 3> m{};
    m[0] = {v2, err};
    return m;
}

std::array<double, 3> drift_sum(int64_t N, const KernelSpec& spec) {
    spec.validate();
    if (N < 1) throw std::invalid_argument("drift_sum: N >= 1 required");
    double s = spec.s();
    std::array<double, 3> out{0.0, 0.0, 0.0};
    if (spec.d == 1) {
        out[0] = 2.0 * num::par_sum(N, [&](int64_t i) { return std::pow(double(i + 1), -spec.alpha); });
        return out;
    }
    if (spec.d == 2) {
        // sum_{c=1..N} 2 c * sum_{|x| <= M(c)} (c^2+x^2)^{-s/2}
        out[0] = num::par_sum(N, [&](int64_t i) {
            double c = double(i + 1);
            double rem = double(N) * double(N) - c * c;
            int64_t M = int64_t(std::sqrt(std::max(0.0, rem)));
            while (double(M) * double(M) > rem) --M;
            return 2.0 * c * line_sum_bounded(c * c, M, s);
        });
        return out;
    }
    out[0] = num::par_sum(N, [&](int64_t i) {
        double c = double(i + 1);
        double B = double(N) * double(N) - c * c;
        return 2.0 * c * plane_sum_bounded(c * c, B, s);
    });
    return out;
}

std::array<double, 3> second_moment_sum(int64_t N, const KernelSpec& spec) {
    spec.validate();
    if (N < 1) throw std::invalid_argument("second_moment_sum: N >= 1 required");
    double s = spec.s();
    std::array<double, 3> out{0.0, 0.0, 0.0};
    if (spec.d == 1) {
        out[0] = 2.0 * num::par_sum(N, [&](int64_t i) { return std::pow(double(i + 1), 2.0 - s); });
        return out;
    }
    auto bound_M = [&](double c) {
        double rem = double(N) * double(N) - c * c;
        int64_t M = int64_t(std::sqrt(std::max(0.0, rem)));
        while (double(M) * double(M) > rem) --M;
        return M;
    };
    if (spec.d == 2) {
        out[0] = num::par_sum(N, [&](int64_t i) {
            double c = double(i + 1);
            return 2.0 * c * c * line_sum_bounded(c * c, bound_M(c), s);
        });
        // line z1 = 0 contributes x^2 ||x||^{-s}, then rows via x^2 = (q+x^2) - q
        Kahan line;
        for (int64_t x = 1; x <= N; ++x) line.add(2.0 * std::pow(double(x), 2.0 - s));
        out[1] = line.get() + num::par_sum(N, [&](int64_t i) {
                     double c = double(i + 1), q = c * c;
                     int64_t M = bound_M(c);
                     return 2.0 * (line_sum_bounded(q, M, s - 2.0) - q * line_sum_bounded(q, M, s));
                 });
        return out;
    }
    if (N > 256) throw ResourceError("second_moment_sum: d=3 enumeration capped at N=256");
    for (int j = 0; j < 3; ++j) {
        Kahan acc;
        for (int64_t a = -N; a <= N; ++a)
            for (int64_t b = -N; b <= N; ++b)
                for (int64_t c = -N; c <= N; ++c) {
                    Lv z(3, a, b, c);
                    if (z.is_zero() || z.norm2() > N * N) continue;
                    double p = eval_p(z, spec);
                    if (p > 0.0) acc.add(double(z[j]) * double(z[j]) * p);
                }
        out[j] = acc.get();
    }
    return out;
}

// least squares fit y = a + b / log N; error from dropping the smallest N
static std::pair<double, double> invlog_fit(const std::vector<std::pair<int64_t, double>>& tab) {
    auto fit = [](const std::vector<std::pair<int64_t, double>>& t) {
        double su = 0, sy = 0, suu = 0, suy = 0;
        for (auto& [N, y] : t) {
            double u = 1.0 / std::log(double(N));
            su += u;
            sy += y;
            suu += u * u;
            suy += u * y;
        }
        double n = double(t.size());
        double b = (n * suy - su * sy) / (n * suu - su * su);
        double a = (sy - b * su) / n;
        return std::make_pair(a, b);
    };
    auto [a, b] = fit(tab);
    std::vector<std::pair<int64_t, double>> dropped(tab.begin() + 1, tab.end());
    double a1 = fit(dropped).first;
    double rss = 0;
    for (auto& [N, y] : tab) {
        double r = y - a - b / std::log(double(N));
        rss += r * r;
    }
    return {a, std::abs(a - a1) + std::sqrt(rss / double(tab.size()))};
}

static std::vector<int64_t> default_grid(int d) {
    std::vector<int64_t> g;
    int lo = (d == 3) ? 5 : 10, hi = (d == 3) ? 8 : 16;
    for (int k = lo; k <= hi; ++k) g.push_back(int64_t(1) << k);
    return g;
}

Extrapolation gamma_d(const KernelSpec& spec, std::vector<int64_t> grid) {
    spec.validate();
    if (spec.alpha != 1.0) throw RegimeError("gamma_d: defined only for alpha = 1");
    if (grid.empty()) grid = default_grid(spec.d);
    Extrapolation ex;
    for (int64_t N : grid) ex.table.emplace_back(N, drift_sum(N, spec)[0] / std::log(double(N)));
    auto [a, err] = invlog_fit(ex.table);
    ex.value = a;
    ex.abs_error = err;
    return ex;
}

DMatrix D_matrix(const KernelSpec& spec, std::vector<int64_t> grid) {
    spec.validate();
    if (spec.alpha != 2.0) throw RegimeError("D_matrix: defined only for alpha = 2");
    if (grid.empty()) grid = default_grid(spec.d);
    if (spec.d == 3 && grid.back() > 256) grid = {64, 96, 128, 192, 256};
    DMatrix D;
    D.d = spec.d;
    std::vector<std::vector<std::pair<int64_t, double>>> tabs(size_t(spec.d));
    for (int64_t N : grid) {
        auto s2 = second_moment_sum(N, spec);
        for (int j = 0; j < spec.d; ++j) tabs[size_t(j)].emplace_back(N, s2[size_t(j)] / std::log(double(N)));
    }
    for (int j = 0; j < spec.d; ++j) {
        auto [a, err] = invlog_fit(tabs[size_t(j)]);
        D.v[j][j] = a;
        D.err[j][j] = err;
    }
    return D;
}

// ---------------------------------------------------------------------------
// Sampler
// ---------------------------------------------------------------------------

JumpSampler sampler_common(const KernelSpec& spec, bool symmetric) {
    spec.validate();
    double r = double(spec.r_max);
    double est = 1.0;
    for (int i = 0; i < spec.d; ++i) est *= (2.0 * r + 1.0);
    if (est > double(1 << 27)) throw ResourceError("JumpSampler: r_max too large for the table budget");

    JumpSampler js;
    js.d_ = spec.d;
    js.r_max_ = spec.r_max;
    const int64_t R = spec.r_max, R2 = R * R;
    Kahan mass;
    auto push = [&](int64_t a, int64_t b, int64_t cc, double w) {
        js.dz_[0].push_back(int32_t(a));
        js.dz_[1].push_back(int32_t(b));
        js.dz_[2].push_back(int32_t(cc));
        js.weight_.push_back(w);
        mass.add(w);
    };
    const double s = spec.s();
    const int64_t alim = symmetric ? R : 0;
    const int64_t ylim = (spec.d >= 2) ? R : 0, zlim = (spec.d >= 3) ? R : 0;
    for (int64_t a = -alim; a <= R; ++a)
        for (int64_t b = -ylim; b <= ylim; ++b)
            for (int64_t c = -zlim; c <= zlim; ++c) {
                int64_t n2 = a * a + b * b + c * c;
                if (n2 == 0 || n2 > R2) continue;
                // asymmetric: z1 > 0 carries weight 2, the z1 = 0 face weight 1,
                // z1 < 0 has no mass; symmetric: plain ||z||^{-d-alpha}
                double w = symmetric ? 1.0 : ((a > 0) ? 2.0 : (a == 0 ? 1.0 : 0.0));
                if (w == 0.0) continue;
                push(a, b, c, w * std::pow(double(n2), -0.5 * s));
            }
    js.n_ = js.weight_.size();
    if (js.n_ == 0) throw std::invalid_argument("JumpSampler: empty support");
    js.trunc_mass_ = mass.get();
    js.dropped_mass_ = std::max(0.0, total_rate(spec).value - js.trunc_mass_);

    // split at a radius holding nearly all the mass, then one Vose alias
    // table per part; the rare tail lives out of cache without cost
    auto build_alias = [&](const std::vector<uint32_t>& idx) {
        size_t n = idx.size();
        std::vector<JumpSampler::Entry> out(n);
        double mass = 0.0;
        for (uint32_t i : idx) mass += js.weight_[i];
        std::vector<double> scaled(n);
        for (size_t k = 0; k < n; ++k) scaled[k] = js.weight_[idx[k]] * double(n) / mass;
        std::vector<uint32_t> small, large;
        for (uint32_t k = 0; k < n; ++k) (scaled[k] < 1.0 ? small : large).push_back(k);
        std::vector<double> prob(n, 1.0);
        std::vector<uint32_t> alias(n, 0);
        while (!small.empty() && !large.empty()) {
            uint32_t lo = small.back();
            small.pop_back();
            uint32_t hi = large.back();
            prob[lo] = scaled[lo];
            alias[lo] = hi;
            scaled[hi] = (scaled[hi] + scaled[lo]) - 1.0;
            if (scaled[hi] < 1.0) {
                large.pop_back();
                small.push_back(hi);
            }
        }
        for (size_t k = 0; k < n; ++k) {
            uint32_t i = idx[k];
            out[k] = {prob[k], alias[k], {js.dz_[0][i], js.dz_[1][i], js.dz_[2][i]}};
        }
        return std::make_pair(out, mass);
    };
    int64_t r_head = R;
    {
        // smallest radius keeping at least 99.9% of the truncated mass
        std::vector<double> shell_mass(size_t(R + 1), 0.0);
        for (size_t i = 0; i < js.n_; ++i) {
            int64_t n2 = int64_t(js.dz_[0][i]) * js.dz_[0][i] + int64_t(js.dz_[1][i]) * js.dz_[1][i] +
                         int64_t(js.dz_[2][i]) * js.dz_[2][i];
            shell_mass[size_t(std::sqrt(double(n2)))] += js.weight_[i];
        }
        double acc = 0.0;
        for (int64_t r0 = 0; r0 <= R; ++r0) {
            acc += shell_mass[size_t(r0)];
            if (acc >= 0.999 * js.trunc_mass_) {
                r_head = std::max<int64_t>(r0 + 1, 8);
                break;
            }
        }
    }
    std::vector<uint32_t> head_idx, tail_idx;
    for (uint32_t i = 0; i < js.n_; ++i) {
        int64_t n2 = int64_t(js.dz_[0][i]) * js.dz_[0][i] + int64_t(js.dz_[1][i]) * js.dz_[1][i] +
                     int64_t(js.dz_[2][i]) * js.dz_[2][i];
        (n2 <= r_head * r_head ? head_idx : tail_idx).push_back(i);
    }
    if (tail_idx.empty() || head_idx.empty()) {
        std::vector<uint32_t> all(js.n_);
        for (uint32_t i = 0; i < js.n_; ++i) all[i] = i;
        js.head_ = build_alias(all).first;
        js.head_mass_frac_ = 1.0;
    } else {
        auto [head, hm] = build_alias(head_idx);
        auto [tail, tm] = build_alias(tail_idx);
        js.head_ = std::move(head);
        js.tail_ = std::move(tail);
        js.head_mass_frac_ = hm / (hm + tm);
    }
    return js;
}

JumpSampler JumpSampler::build(const KernelSpec& spec) { return sampler_common(spec, false); }

JumpSampler JumpSampler::build_symmetric(const KernelSpec& spec) { return sampler_common(spec, true); }

std::array<double, 2> JumpSampler::cf_exponent(double beta, const std::array<double, 3>& a) const {
    Kahan re, im;
    for (size_t i = 0; i < n_; ++i) {
        double phase = beta * (double(dz_[0][i]) * a[0] + double(dz_[1][i]) * a[1] + double(dz_[2][i]) * a[2]);
        re.add(weight_[i] * (std::cos(phase) - 1.0));
        im.add(weight_[i] * std::sin(phase));
    }
    return {re.get(), im.get()};
}

} // namespace tagex
