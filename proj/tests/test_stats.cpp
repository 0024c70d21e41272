#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "tagex/stats.hpp"
#include "tagex/process.hpp"
#include "oracles.hpp"

using namespace tagex;
using cplx = std::complex<double>;

TEST_CASE("ecf basics") {
    std::vector<std::array<double, 3>> xs{{2.0, 0, 0}, {2.0, 0, 0}};
    std::vector<double> grid{-1.0, 0.0, 0.7};
    auto t = ecf(xs, {1, 0, 0}, grid);
    // all samples equal: mean is e^{i beta x} with zero spread
    CHECK(t.mean[2] == cplx(std::cos(1.4), std::sin(1.4)));
    CHECK(t.se[2] == 0.0);
    CHECK(t.mean[1] == cplx(1.0, 0.0)); // beta = 0 exactly
    // conjugate symmetry is exact for mirrored grids
    CHECK(t.mean[0] == std::conj(ecf(xs, {1, 0, 0}, {1.0, 0.0, 0.7}).mean[0]));
    CHECK_THROWS_AS(ecf({{1.0, 0, 0}}, {1, 0, 0}, grid), std::invalid_argument);
}

TEST_CASE("ecf modulus stays within the sampling band") {
    Rng rng(5, 0);
    std::vector<std::array<double, 3>> xs;
    for (int i = 0; i < 2000; ++i) xs.push_back({std::floor(rng.uniform() * 7) - 3.0, 0, 0});
    std::vector<double> grid;
    for (int i = -5; i <= 5; ++i) grid.push_back(0.4 * i);
    auto t = ecf(xs, {1, 0, 0}, grid);
    for (size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(t.mean[i]) <= 1.0 + 3.0 * t.se[i]);
}

TEST_CASE("cf_distance: self distance is zero, wrong-alpha control exceeds 3") {
    KernelSpec k{1, 0.8, 512};
    auto js = JumpSampler::build(k);
    const double T = std::pow(64.0, 0.8); // N = 64 free run
    const int M = 10000;
    auto xs = run_replicas<std::array<double, 3>>(M, 2718, [&](int, Rng& rng) {
        auto cfg = Configuration::init_equilibrium(1, 1024, 0.0, rng, 512);
        RunParams p;
        p.T = T;
        p.timed = false;
        auto rep = run(cfg, js, p, rng);
        return std::array<double, 3>{double(rep.displacement[0]) / 64.0, 0, 0};
    });
    std::vector<double> grid;
    for (int i = -5; i <= 5; ++i) grid.push_back(0.4 * i);
    auto table = ecf(xs, {1, 0, 0}, grid);
    // target: exact truncated compound-Poisson CF of the finite model
    auto target = [&](double beta) {
        auto e = js.cf_exponent(beta / 64.0, {1, 0, 0});
        return std::exp(cplx(T * e[0], T * e[1]));
    };
    auto self = cf_distance(table, [&](double beta) { return table.mean[size_t((beta + 2.0) / 0.4 + 0.5)]; });
    CHECK(self.sup_sigma == 0.0);
    auto dist = cf_distance(table, target);
    CHECK(dist.sup_sigma < 3.0);
    // deliberately wrong tail exponent: power check at M = 1e4
    auto ex_wrong = LevyExponent::make(0.8 + 0.3, 1, {1, 0, 0}, 0.0);
    auto wrong = cf_distance(table, [&](double beta) { return levy_cf(beta, 1.0, ex_wrong); });
    CHECK(wrong.sup_sigma > 3.0);
}

TEST_CASE("bootstrap CI has near-nominal coverage on gaussian data") {
    // 300 synthetic experiments; CHECK the 95% CI covers the true mean ~95%
    int covered = 0;
    const int E = 300, n = 60;
    for (int e = 0; e < E; ++e) {
        Rng rng(9000, uint64_t(e));
        std::vector<double> xs;
        for (int i = 0; i < n; ++i) {
            double u1 = rng.uniform(), u2 = rng.uniform();
            xs.push_back(std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2));
        }
        auto [m, half] = bootstrap_mean_ci(xs, 17 + uint64_t(e), 300);
        if (std::abs(m - 0.0) <= half) ++covered;
    }
    double cov = double(covered) / E;
    CHECK(cov > 0.88);
    CHECK(cov < 0.99);
}

TEST_CASE("lln_estimate: frozen lattice gives exactly zero and trivial wiring") {
    std::vector<std::array<double, 3>> zeros(50, {0.0, 0.0, 0.0});
    auto est = lln_estimate(zeros, 1, {2.0, 0, 0}, 11);
    CHECK(est.mean[0] == 0.0);
    CHECK(est.rel_deviation == doctest::Approx(1.0));
    std::vector<std::array<double, 3>> ones(50, {1.0, 0.0, 0.0});
    auto est2 = lln_estimate(ones, 1, {1.0, 0, 0}, 11);
    CHECK(est2.rel_deviation == doctest::Approx(0.0));
    CHECK_THROWS_AS(lln_estimate(ones, 1, {0.0, 0, 0}, 11), std::invalid_argument);
}

TEST_CASE("occupation_variance_fit recovers a planted exponent") {
    // synthetic integrals with Var ~ s^{1.4}: X_s = s^{0.7} * Z
    std::vector<double> horizons{16, 32, 64, 128, 256, 512, 1024};
    std::vector<std::vector<double>> integrals;
    for (int m = 0; m < 400; ++m) {
        Rng rng(31337, uint64_t(m));
        std::vector<double> row;
        for (double s : horizons) {
            double u1 = rng.uniform(), u2 = rng.uniform();
            double z = std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
            row.push_back(std::pow(s, 0.7) * z);
        }
        integrals.push_back(row);
    }
    auto fit = occupation_variance_fit(horizons, integrals, 1, 1.25, 5);
    CHECK(std::abs(fit.exponent - 1.4) < 3.0 * fit.ci_half + 0.05);
    CHECK(fit.predicted_exponent == doctest::Approx(2.0 - 1.0 / 1.25));
    CHECK_FALSE(fit.log_flag);
    auto fit2 = occupation_variance_fit(horizons, integrals, 2, 2.0, 5);
    CHECK(fit2.predicted_exponent == 1.0);
    CHECK(fit2.log_flag);
    CHECK(fit2.log_kind == std::string("s log log s"));
    CHECK_THROWS_AS(occupation_variance_fit({1, 2, 3}, integrals, 1, 1.5, 5), std::invalid_argument);
    // s = 0 horizon: variance is exactly zero, excluded from the fit
    std::vector<double> h0{0.0, 16, 32, 64, 128};
    std::vector<std::vector<double>> i0;
    for (int m = 0; m < 50; ++m) {
        Rng rng(99, uint64_t(m));
        std::vector<double> row{0.0};
        for (size_t j = 1; j < h0.size(); ++j) row.push_back(std::sqrt(h0[j]) * (rng.uniform() - 0.5));
        i0.push_back(row);
    }
    auto fit3 = occupation_variance_fit(h0, i0, 3, 2.0, 5);
    CHECK(std::abs(fit3.exponent - 1.0) < 0.3);
}

TEST_CASE("cf_distance phase fit absorbs an affine phase") {
    // integer samples, exact CF target shifted by a linear phase
    Rng rng(515, 0);
    std::vector<std::array<double, 3>> xs;
    const int M = 4000;
    for (int i = 0; i < M; ++i) xs.push_back({std::floor(rng.uniform() * 7.0) - 3.0, 0, 0});
    std::vector<double> grid;
    for (int i = -4; i <= 4; ++i) grid.push_back(0.3 * i);
    auto table = ecf(xs, {1, 0, 0}, grid);
    const double shift = 0.35;
    auto plain = [&](double beta) {
        cplx acc(0, 0);
        for (int k = -3; k <= 3; ++k) acc += std::exp(cplx(0.0, beta * k));
        return acc / 7.0; // exact 1 at beta = 0
    };
    auto shifted = [&](double beta) { return plain(beta) * std::exp(cplx(0.0, -beta * shift)); };
    auto base = cf_distance(table, plain);
    CHECK(base.sup_sigma < 4.0);
    auto raw = cf_distance(table, shifted);
    auto fitted = cf_distance(table, shifted, nullptr, true);
    CHECK(raw.sup_sigma > 3.0);
    CHECK(fitted.sup_sigma < 4.0);
    CHECK(std::abs(fitted.fitted_phase - shift) < 0.05);
}
