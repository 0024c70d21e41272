#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "tagex/oracle.hpp"
#include "tagex/process.hpp"
#include "tagex/stats.hpp"

using namespace tagex;
using cplx = std::complex<double>;

TEST_CASE("generator structure: state counts and the single-particle sector") {
    KernelSpec spec{1, 1.2, 2};
    auto env = build_generator(GeneratorKind::Environment, 1, 4, spec);
    CHECK(env.n_states == 8); // 2^(L-1)
    auto full = build_generator(GeneratorKind::Exclusion, 1, 6, KernelSpec{1, 1.2, 3});
    CHECK(full.n_states == 64);
    // rates out of a one-particle state match the folded kernel
    auto rate_from_single = [&](int64_t x, int64_t y) {
        double r = 0.0;
        for (auto& tr : full.transitions)
            if (tr.from == (uint64_t(1) << x) && tr.to == (uint64_t(1) << y)) r += tr.rate;
        return r;
    };
    for (int64_t x = 0; x < 6; ++x)
        for (int64_t y = 0; y < 6; ++y) {
            if (x == y) continue;
            double want = 0.0;
            for (int64_t z = -3; z <= 3; ++z)
                if (z != 0 && ((y - x - z) % 6 + 6) % 6 == 0) want += eval_p(Lv(1, z), KernelSpec{1, 1.2, 3});
            CHECK(rate_from_single(x, y) == doctest::Approx(want).epsilon(1e-14));
        }
    CHECK_THROWS_AS(build_generator(GeneratorKind::Exclusion, 2, 8, KernelSpec{2, 1.0, 4}), ResourceError);
}

TEST_CASE("stationarity of the product measures") {
    for (double rho : {0.3, 0.5, 0.7}) {
        auto full = build_generator(GeneratorKind::Exclusion, 1, 10, KernelSpec{1, 1.5, 5});
        CHECK(check_stationarity(full, nu_product(full, rho)) < 1e-12);
        auto env = build_generator(GeneratorKind::Environment, 1, 8, KernelSpec{1, 1.5, 4});
        CHECK(check_stationarity(env, nu_product(env, rho)) < 1e-12);
        auto sym = build_generator(GeneratorKind::SymmetricExclusion, 1, 8, KernelSpec{1, 1.5, 4});
        CHECK(check_stationarity(sym, nu_product(sym, rho)) < 1e-12);
    }
    // every uniform product measure is stationary (one-parameter family);
    // the negative control needs a non-constant density profile
    auto env = build_generator(GeneratorKind::Environment, 1, 8, KernelSpec{1, 1.5, 4});
    CHECK(check_stationarity(env, nu_product(env, 0.4)) < 1e-12);
    CHECK(check_stationarity(env, nu_product(env, 0.55)) < 1e-12);
    {
        std::vector<double> tilted(env.n_states);
        double norm = 0.0;
        for (uint64_t m = 0; m < env.n_states; ++m) {
            double w = 1.0;
            for (int x = 0; x < env.bits; ++x) {
                double rx = 0.3 + 0.4 * double(x) / double(env.bits - 1);
                w *= ((m >> x) & 1) ? rx : (1.0 - rx);
            }
            tilted[m] = w;
            norm += w;
        }
        for (auto& w : tilted) w /= norm;
        CHECK(check_stationarity(env, tilted) > 1e-3);
    }
    // d=2 torus
    auto full2 = build_generator(GeneratorKind::Exclusion, 2, 3, KernelSpec{2, 1.0, 1});
    CHECK(check_stationarity(full2, nu_product(full2, 0.5)) < 1e-12);
    auto env2 = build_generator(GeneratorKind::Environment, 2, 3, KernelSpec{2, 1.0, 1});
    CHECK(check_stationarity(env2, nu_product(env2, 0.5)) < 1e-12);
}

TEST_CASE("martingale mean is one under the matrix exponential") {
    auto env = build_generator(GeneratorKind::Environment, 1, 6, KernelSpec{1, 1.2, 3});
    CHECK(std::abs(martingale_mean(env, 0.4, 0.0, {1, 0, 0}, 1.0, 1.5) - 1.0) < 1e-13);
    for (double beta : {0.4, 1.0, 2.3}) {
        for (double t : {0.5, 2.0}) {
            cplx m = martingale_mean(env, 0.4, beta, {1, 0, 0}, 1.0, t);
            CHECK(std::abs(m - 1.0) < 1e-8);
        }
    }
    auto env4 = build_generator(GeneratorKind::Environment, 1, 4, KernelSpec{1, 0.7, 2});
    CHECK(std::abs(martingale_mean(env4, 0.6, 1.1, {1, 0, 0}, 2.0, 1.0) - 1.0) < 1e-8);
}

TEST_CASE("martingale mean is one under simulation") {
    KernelSpec spec{1, 1.2, 3};
    auto js = JumpSampler::build(spec);
    const double rho = 0.4, t = 1.5, beta = 0.8, N = 1.0;
    const int M = 20000;
    std::vector<Lv> watch;
    for (size_t i = 0; i < js.size(); ++i) watch.push_back(js.entry(i));
    auto vals = run_replicas<std::array<double, 2>>(M, 99001, [&](int, Rng& rng) {
        auto cfg = Configuration::init_equilibrium(1, 6, rho, rng, 3);
        RunParams p;
        p.T = t;
        p.watch_sites = watch;
        auto rep = run(cfg, js, p, rng);
        cplx expo(0.0, beta * double(rep.displacement[0]) / N);
        for (size_t i = 0; i < js.size(); ++i) {
            double I = (1.0 - rho) * t + rep.occupation[i]; // int (1 - xi_s(z)) ds
            double ph = beta * double(js.entry(i)[0]) / N;
            expo -= cplx(std::cos(ph) - 1.0, std::sin(ph)) * js.entry_weight(i) * I;
        }
        cplx m = std::exp(expo);
        return std::array<double, 2>{m.real(), m.imag()};
    });
    double mre = 0, mim = 0;
    for (auto& v : vals) {
        mre += v[0] / M;
        mim += v[1] / M;
    }
    double vre = 0, vim = 0;
    for (auto& v : vals) {
        vre += (v[0] - mre) * (v[0] - mre) / (M - 1.0);
        vim += (v[1] - mim) * (v[1] - mim) / (M - 1.0);
    }
    CHECK(std::abs(mre - 1.0) < 3.0 * std::sqrt(vre / M));
    CHECK(std::abs(mim) < 3.0 * std::sqrt(vim / M));
}

TEST_CASE("resolvent quadratic form: trivial limits") {
    auto sym = build_generator(GeneratorKind::SymmetricExclusion, 1, 6, KernelSpec{1, 1.5, 3});
    auto mu = nu_product(sym, 0.5);
    std::vector<double> zero(sym.n_states, 0.0);
    CHECK(resolvent_quadratic(sym, zero, 0.7, mu) == 0.0);
    // f = eta(1) - rho
    std::vector<double> f(sym.n_states);
    for (uint64_t m = 0; m < sym.n_states; ++m) f[m] = double((m >> 1) & 1) - 0.5;
    double ff = 0.0;
    for (uint64_t m = 0; m < sym.n_states; ++m) ff += mu[m] * f[m] * f[m];
    for (double lam : {1e4, 1e6}) {
        double q = resolvent_quadratic(sym, f, lam, mu);
        CHECK(lam * q == doctest::Approx(ff).epsilon(10.0 / lam));
    }
}

TEST_CASE("resolvent form equals the Laplace transform of occupation variance (MC)") {
    const int64_t L = 8;
    KernelSpec spec{1, 1.5, 4};
    auto sym = build_generator(GeneratorKind::SymmetricExclusion, 1, L, spec);
    const double rho = 0.5, t = 0.8;
    auto mu = nu_product(sym, rho);
    const int64_t site = 2;
    std::vector<double> f(sym.n_states);
    for (uint64_t m = 0; m < sym.n_states; ++m) f[m] = double((m >> site) & 1) - rho;
    double lhs = 2.0 * t * t * resolvent_quadratic(sym, f, 1.0 / t, mu);

    // Simpson weights for int_0^{smax} e^{-s/t} E[(int_0^s (eta-rho))^2] ds
    const double smax = 20.0 * t;
    const int nseg = 160;
    std::vector<double> sgrid;
    for (int i = 1; i <= nseg; ++i) sgrid.push_back(smax * double(i) / nseg);
    auto js_sym = JumpSampler::build_symmetric(spec);
    const int M = 30000;
    auto vals = run_replicas<double>(M, 4242, [&](int, Rng& rng) {
        auto cfg = Configuration::init_equilibrium(1, L, rho, rng, 4);
        RunParams p;
        p.T = smax;
        p.watch_absolute = {site};
        p.checkpoints = sgrid;
        auto rep = run(cfg, js_sym, p, rng);
        // Simpson over the checkpoint grid of e^{-s/t} (int)^2, with f(0) = 0
        double acc = 0.0;
        double h = smax / nseg;
        for (int i = 0; i <= nseg; ++i) {
            double s = h * double(i);
            double v = (i == 0) ? 0.0 : rep.checkpoint_occupation_absolute[size_t(i - 1)][0];
            double w = (i == 0 || i == nseg) ? 1.0 : ((i % 2) ? 4.0 : 2.0);
            acc += w * std::exp(-s / t) * v * v;
        }
        return acc * h / 3.0;
    });
    double mean = 0, var = 0;
    for (double v : vals) mean += v / M;
    for (double v : vals) var += (v - mean) * (v - mean) / (M - 1.0);
    double se = std::sqrt(var / M);
    CHECK(std::abs(mean - lhs) < 3.0 * se + 0.01 * lhs);
}

TEST_CASE("simulator and oracle agree on the displacement CF") {
    const int64_t L = 8;
    KernelSpec spec{1, 1.2, 4};
    auto env = build_generator(GeneratorKind::Environment, 1, L, spec);
    const double rho = 0.5, t = 1.5;
    auto js = JumpSampler::build(spec);
    const int M = 40000;
    auto xs = run_replicas<std::array<double, 3>>(M, 31415, [&](int, Rng& rng) {
        auto cfg = Configuration::init_equilibrium(1, L, rho, rng, 4);
        RunParams p;
        p.T = t;
        p.timed = false;
        auto rep = run(cfg, js, p, rng);
        return std::array<double, 3>{double(rep.displacement[0]), 0, 0};
    });
    std::vector<double> grid{0.3, 0.9, 1.5, 2.1, 2.7};
    auto table = ecf(xs, {1, 0, 0}, grid);
    auto dist = cf_distance(table, [&](double beta) { return displacement_cf(env, rho, beta, {1, 0, 0}, t); });
    CHECK(dist.sup_sigma < 3.0);
}

TEST_CASE("psi basis: orthonormality, exchange identity, Dirichlet form") {
    auto rep = psi_basis_checks(1, 6, KernelSpec{1, 1.5, 3}, 0.3, 777);
    CHECK(rep.psi_empty_is_one);
    CHECK(rep.max_orthonormality_dev < 1e-12);
    CHECK(rep.max_exchange_dev < 1e-14);
    CHECK(rep.max_dirichlet_rel_dev < 1e-10);
    auto rep2 = psi_basis_checks(2, 3, KernelSpec{2, 1.0, 1}, 0.6, 778);
    CHECK(rep2.max_orthonormality_dev < 1e-12);
    CHECK(rep2.max_dirichlet_rel_dev < 1e-10);
}
