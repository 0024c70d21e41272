#include "tagex/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tagex/numerics.hpp"

namespace tagex {

using num::Kahan;

ECFTable ecf(const std::vector<std::array<double, 3>>& samples, const std::array<double, 3>& a,
             const std::vector<double>& beta_grid) {
    if (samples.size() < 2) throw std::invalid_argument("ecf: at least two samples required");
    ECFTable t;
    t.a = a;
    t.beta = beta_grid;
    t.n_samples = samples.size();
    const double M = double(samples.size());
    for (double b : beta_grid) {
        Kahan sre, sim, sre2, sim2;
        for (const auto& x : samples) {
            double ph = b * (x[0] * a[0] + x[1] * a[1] + x[2] * a[2]);
            double cr = std::cos(ph), ci = std::sin(ph);
            sre.add(cr);
            sim.add(ci);
            sre2.add(cr * cr);
            sim2.add(ci * ci);
        }
        double mre = sre.get() / M, mim = sim.get() / M;
        double vre = std::max(0.0, (sre2.get() - M * mre * mre) / (M - 1.0));
        double vim = std::max(0.0, (sim2.get() - M * mim * mim) / (M - 1.0));
        t.mean.emplace_back(mre, mim);
        t.se.push_back(std::sqrt((vre + vim) / M));
    }
    return t;
}

CfDistance cf_distance(const ECFTable& table, const std::function<std::complex<double>(double)>& target,
                       const std::function<double(double)>& bias, bool fit_phase) {
    CfDistance out;
    const size_t n = table.beta.size();
    std::vector<std::complex<double>> tg(n);
    for (size_t i = 0; i < n; ++i) tg[i] = target(table.beta[i]);
    double c = 0.0;
    if (fit_phase) {
        auto loss = [&](double cc) {
            double acc = 0.0;
            for (size_t i = 0; i < n; ++i) {
                std::complex<double> rot = tg[i] * std::exp(std::complex<double>(0.0, table.beta[i] * cc));
                acc += std::norm(table.mean[i] - rot);
            }
            return acc;
        };
        double lo = -10.0, hi = 10.0;
        for (int pass = 0; pass < 4; ++pass) {
            const int g = 400;
            double best = lo, bestv = loss(lo);
            for (int i = 1; i <= g; ++i) {
                double cc = lo + (hi - lo) * double(i) / g;
                double v = loss(cc);
                if (v < bestv) {
                    bestv = v;
                    best = cc;
                }
            }
            double w = (hi - lo) / g;
            lo = best - 2.0 * w;
            hi = best + 2.0 * w;
            c = best;
        }
        for (size_t i = 0; i < n; ++i) tg[i] *= std::exp(std::complex<double>(0.0, table.beta[i] * c));
    }
    out.fitted_phase = c;
    out.target = tg;
    for (size_t i = 0; i < n; ++i) {
        double dev = std::abs(table.mean[i] - tg[i]);
        double bi = bias ? bias(table.beta[i]) : 0.0;
        out.bias.push_back(bi);
        double adj = std::max(0.0, dev - bi);
        double sig = (table.se[i] > 0.0) ? adj / table.se[i] : (adj > 0.0 ? 1e300 : 0.0);
        out.per_beta_sigma.push_back(sig);
        out.sup_sigma = std::max(out.sup_sigma, sig);
    }
    return out;
}

std::array<double, 2> bootstrap_mean_ci(const std::vector<double>& xs, uint64_t seed, int n_boot) {
    Kahan acc;
    for (double x : xs) acc.add(x);
    double mean = acc.get() / double(xs.size());
    Rng rng(seed, 0x60075);
    std::vector<double> ms;
    ms.reserve(size_t(n_boot));
    for (int b = 0; b < n_boot; ++b) {
        Kahan a2;
        for (size_t i = 0; i < xs.size(); ++i) a2.add(xs[rng.below(xs.size())]);
        ms.push_back(a2.get() / double(xs.size()));
    }
    std::sort(ms.begin(), ms.end());
    double lo = ms[size_t(0.025 * n_boot)], hi = ms[size_t(std::min<double>(n_boot - 1, 0.975 * n_boot))];
    return {mean, 0.5 * (hi - lo)};
}

LlnEstimate lln_estimate(const std::vector<std::array<double, 3>>& scaled_endpoints, int d,
                         const std::array<double, 3>& predicted, uint64_t seed, int n_boot) {
    if (scaled_endpoints.size() < 2) throw std::invalid_argument("lln_estimate: need replicas");
    LlnEstimate est;
    est.predicted = predicted;
    double pn = 0.0;
    for (int j = 0; j < d; ++j) {
        std::vector<double> xs;
        xs.reserve(scaled_endpoints.size());
        for (const auto& x : scaled_endpoints) xs.push_back(x[size_t(j)]);
        auto [m, ci] = bootstrap_mean_ci(xs, seed + uint64_t(j), n_boot);
        est.mean[size_t(j)] = m;
        est.ci_half[size_t(j)] = ci;
        pn += predicted[size_t(j)] * predicted[size_t(j)];
    }
    pn = std::sqrt(pn);
    double dev = 0.0, devse = 0.0;
    for (int j = 0; j < d; ++j) {
        double r = est.mean[size_t(j)] - predicted[size_t(j)];
        dev += r * r;
        devse += est.ci_half[size_t(j)] * est.ci_half[size_t(j)];
    }
    if (pn == 0.0) throw std::invalid_argument("lln_estimate: zero predicted limit");
    est.rel_deviation = std::sqrt(dev) / pn;
    est.rel_deviation_se = std::sqrt(devse) / (2.0 * pn); // CI half-width ~ 2 se
    return est;
}

static double slope_loglog(const std::vector<double>& h, const std::vector<double>& v) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < h.size(); ++i) {
        if (v[i] <= 0.0) continue;
        double x = std::log(h[i]), y = std::log(v[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw std::runtime_error("slope_loglog: not enough positive variances");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScalingFit occupation_variance_fit(const std::vector<double>& horizons,
                                   const std::vector<std::vector<double>>& integrals, int d, double alpha,
                                   uint64_t seed, int n_boot) {
    if (horizons.size() < 4) throw std::invalid_argument("occupation_variance_fit: need at least 4 horizons");
    const size_t M = integrals.size(), H = horizons.size();
    auto variances = [&](const std::vector<size_t>& idx) {
        std::vector<double> v(H, 0.0);
        for (size_t hi = 0; hi < H; ++hi) {
            Kahan s1, s2;
            for (size_t m : idx) {
                double x = integrals[m][hi];
                s1.add(x);
                s2.add(x * x);
            }
            double n = double(idx.size());
            double mean = s1.get() / n;
            v[hi] = std::max(0.0, (s2.get() - n * mean * mean) / (n - 1.0));
        }
        return v;
    };
    std::vector<size_t> all(M);
    for (size_t i = 0; i < M; ++i) all[i] = i;
    ScalingFit fit;
    fit.horizons = horizons;
    fit.variance = variances(all);
    fit.exponent = slope_loglog(horizons, fit.variance);
    Rng rng(seed, 0xB007);
    std::vector<double> slopes;
    for (int b = 0; b < n_boot; ++b) {
        std::vector<size_t> idx(M);
        for (size_t i = 0; i < M; ++i) idx[i] = size_t(rng.below(M));
        slopes.push_back(slope_loglog(horizons, variances(idx)));
    }
    std::sort(slopes.begin(), slopes.end());
    fit.ci_half = 0.5 * (slopes[size_t(std::min<double>(n_boot - 1, 0.975 * n_boot))] - slopes[size_t(0.025 * n_boot)]);
    if (d == 1 && alpha > 1.0 && alpha < 2.0) {
        fit.predicted_exponent = 2.0 - 1.0 / alpha;
    } else {
        fit.predicted_exponent = 1.0;
        if (d == 1 && alpha == 1.0) {
            fit.log_flag = true;
            fit.log_kind = "s log s";
        } else if (d == 2 && alpha == 2.0) {
            fit.log_flag = true;
            fit.log_kind = "s log log s";
        }
    }
    return fit;
}

} // namespace tagex
