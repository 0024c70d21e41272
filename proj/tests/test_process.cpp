#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "tagex/process.hpp"
#include "tagex/stats.hpp"
#include "oracles.hpp"

using namespace tagex;

TEST_CASE("init_equilibrium: degenerate densities and empirical density") {
    KernelSpec k{1, 1.0, 8};
    auto js = JumpSampler::build(k);
    Rng rng(42, 0);
    auto empty = Configuration::init_equilibrium(1, 64, 0.0, rng, 8);
    CHECK(empty.n_particles() == 1);
    CHECK(empty.occupied(0));
    auto full = Configuration::init_equilibrium(1, 64, 1.0, rng, 8);
    CHECK(full.n_particles() == 64);
    CHECK_THROWS_AS(Configuration::init_equilibrium(1, 8, 0.5, rng, 8), std::invalid_argument);

    // one million sites in total: density within 4 binomial sigmas
    int64_t occ = 0, tot = 0;
    const double rho = 0.37;
    for (int rep = 0; rep < 16; ++rep) {
        Rng r(1000, uint64_t(rep));
        auto c = Configuration::init_equilibrium(1, 65536, rho, r, 8);
        occ += c.n_particles() - 1;
        tot += 65536 - 1;
    }
    double sigma = std::sqrt(rho * (1 - rho) * double(tot));
    CHECK(std::abs(double(occ) - rho * double(tot)) < 4.0 * sigma);

    // canonical placement pins the particle number
    Rng r2(7, 0);
    auto cc = Configuration::init_equilibrium(1, 256, 0.5, r2, 8, true);
    CHECK(cc.n_particles() == 128);
}

TEST_CASE("step: exclusion rules on tiny deterministic configurations") {
    KernelSpec k{1, 0.8, 1};
    auto js = JumpSampler::build(k); // only z = +1
    // two-particle collision: tagged at 0, blocker at 1; a tagged proposal
    // from this configuration is always rejected
    Rng rng(5, 0);
    int tagged_seen = 0;
    for (int i = 0; i < 400; ++i) {
        auto cfg = Configuration::from_sites(1, 8, {1}, 0, 1);
        auto ev = cfg.step(js, rng);
        if (ev.tagged) {
            ++tagged_seen;
            CHECK_FALSE(ev.accepted);
            CHECK(cfg.displacement()[0] == 0);
        }
    }
    CHECK(tagged_seen > 100);

    // full lattice: displacement frozen
    std::vector<int64_t> all;
    for (int64_t s = 1; s < 8; ++s) all.push_back(s);
    auto frozen = Configuration::from_sites(1, 8, all, 0, 1);
    Rng rng2(6, 0);
    for (int i = 0; i < 500; ++i) frozen.step(js, rng2);
    CHECK(frozen.displacement()[0] == 0);
    CHECK(frozen.clock() > 0.0);
    CHECK(frozen.occupied(frozen.tagged_site()));
}

TEST_CASE("run: T=0, bookkeeping identity, particle conservation") {
    KernelSpec k{1, 1.0, 16};
    auto js = JumpSampler::build(k);
    Rng rng(9, 0);
    auto cfg = Configuration::init_equilibrium(1, 64, 0.4, rng, 16);
    int64_t n0 = cfg.n_particles();
    RunParams p0;
    p0.T = 0.0;
    auto rep0 = run(cfg, js, p0, rng);
    CHECK(rep0.displacement[0] == 0);

    RunParams p;
    p.T = 30.0;
    p.track_jump_counters = true;
    p.watch_sites = {Lv(1, 1), Lv(1, 2)};
    auto rep = run(cfg, js, p, rng);
    CHECK(cfg.n_particles() == n0);
    CHECK(cfg.occupied(cfg.tagged_site()));
    // displacement equals the counter-weighted jump sum, exactly
    int64_t from_counters = 0;
    for (auto& [key, cnt] : rep.jump_counters) {
        int64_t z0 = int64_t((key >> 42) & 0x1FFFFF) - (1 << 20);
        from_counters += z0 * int64_t(cnt);
    }
    CHECK(from_counters == rep.displacement[0]);
    // occupation integrals are bounded by max(rho, 1-rho) T
    for (double o : rep.occupation) CHECK(std::abs(o) <= std::max(0.4, 0.6) * p.T + 1e-12);
}

TEST_CASE("free particle: counters are Poisson, CF matches the exact compound form") {
    KernelSpec k{1, 0.8, 64};
    auto js = JumpSampler::build(k);
    const double T = 3.0;
    const int M = 4000;
    // E[N_T^z] = T p(z) within 4 sigma over replicas, for a few small z
    auto reports = run_replicas<RunReport>(
        M, 777,
        [&](int, Rng& rng) {
            auto cfg = Configuration::init_equilibrium(1, 256, 0.0, rng, 64);
            RunParams p;
            p.T = T;
            p.track_jump_counters = true;
            p.timed = false;
            return run(cfg, js, p, rng);
        },
        true);
    for (int64_t z : {1, 2, 3}) {
        double mean = 0.0;
        for (auto& r : reports) {
            auto it = r.jump_counters.find(pack_key(Lv(1, z)));
            if (it != r.jump_counters.end()) mean += double(it->second);
        }
        mean /= M;
        double lambda = T * eval_p(Lv(1, z), k);
        double sigma = std::sqrt(lambda / M);
        CHECK(std::abs(mean - lambda) < 4.0 * sigma);
    }
    // empirical CF vs exp(T sum (e^{i beta z a} - 1) p(z)) on a beta grid
    std::vector<std::array<double, 3>> xs;
    for (auto& r : reports) xs.push_back({double(r.displacement[0]), 0.0, 0.0});
    std::vector<double> grid{-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
    auto table = ecf(xs, {1, 0, 0}, grid);
    auto dist = cf_distance(table, [&](double beta) {
        auto e = js.cf_exponent(beta, {1, 0, 0});
        return std::exp(std::complex<double>(T * e[0], T * e[1]));
    });
    CHECK(dist.sup_sigma < 3.0);
    CHECK(table.mean[3] == std::complex<double>(1.0, 0.0)); // beta = 0 exactly
}

TEST_CASE("stationarity of the environment: window occupation stays at rho") {
    KernelSpec k{1, 1.2, 16};
    auto js = JumpSampler::build(k);
    const double rho = 0.3, T = 5.0;
    const int M = 3000;
    std::vector<Lv> window;
    for (int64_t z = -4; z <= 4; ++z)
        if (z != 0) window.push_back(Lv(1, z));
    auto reports = run_replicas<RunReport>(
        M, 2024,
        [&](int, Rng& rng) {
            auto cfg = Configuration::init_equilibrium(1, 64, rho, rng, 16);
            RunParams p;
            p.T = T;
            p.watch_sites = window;
            return run(cfg, js, p, rng);
        },
        true);
    // time-averaged occupation at each window site: mean of (rho - xi) is 0
    for (size_t w = 0; w < window.size(); ++w) {
        double mean = 0.0, var = 0.0;
        for (auto& r : reports) mean += r.occupation[w];
        mean /= M;
        for (auto& r : reports) var += (r.occupation[w] - mean) * (r.occupation[w] - mean);
        var /= (M - 1.0);
        double sigma = std::sqrt(var / M);
        CHECK(std::abs(mean) < 4.0 * sigma + 1e-9);
    }
}

TEST_CASE("rescaled endpoint: centering wiring") {
    KernelSpec k{1, 1.5, 32};
    auto js = JumpSampler::build(k);
    auto scaling = regime_for(1.5, k);
    const double t = 1.0, N = 8.0;
    Rng rng(31, 0);
    auto cfg = Configuration::init_equilibrium(1, 64, 0.0, rng, 32);
    RunParams p;
    p.T = t * scaling.timescale(N);
    p.timed = false;
    auto rep = run(cfg, js, p, rng);
    auto x = rescaled_endpoint(rep, t, N, scaling);
    double want = (double(rep.displacement[0]) - t * std::pow(N, 1.5) * 1.0 * scaling.m[0]) / N;
    CHECK(x[0] == doctest::Approx(want).epsilon(1e-12));
    CHECK_THROWS_AS(rescaled_endpoint(rep, t, 2 * N, scaling), std::invalid_argument);
    // sub regime at t = 0
    auto sub = regime_for(0.5, k);
    Rng rng2(33, 0);
    auto cfg2 = Configuration::init_equilibrium(1, 64, 0.5, rng2, 32);
    RunParams p2;
    p2.T = 0.0;
    auto rep2 = run(cfg2, js, p2, rng2);
    CHECK(rescaled_endpoint(rep2, 0.0, N, sub)[0] == 0.0);
}

TEST_CASE("determinism: same seed gives identical runs for any thread count") {
    KernelSpec k{1, 1.0, 32};
    auto js = JumpSampler::build(k);
    auto body = [&](int, Rng& rng) {
        auto cfg = Configuration::init_equilibrium(1, 128, 0.5, rng, 32);
        RunParams p;
        p.T = 20.0;
        return run(cfg, js, p, rng);
    };
    auto a = run_replicas<RunReport>(64, 555, body, true);
    auto b = run_replicas<RunReport>(64, 555, body, false);
    for (int i = 0; i < 64; ++i) {
        CHECK(a[size_t(i)].displacement[0] == b[size_t(i)].displacement[0]);
        CHECK(a[size_t(i)].proposals == b[size_t(i)].proposals);
    }
}

TEST_CASE("timed and endpoint modes draw from the same law") {
    // compare displacement means between the two drivers at loose tolerance
    KernelSpec k{1, 1.0, 16};
    auto js = JumpSampler::build(k);
    const int M = 3000;
    const double T = 10.0;
    auto mk = [&](bool timed) {
        return run_replicas<double>(
            M, timed ? 111 : 222,
            [&, timed](int, Rng& rng) {
                auto cfg = Configuration::init_equilibrium(1, 64, 0.5, rng, 16);
                RunParams p;
                p.T = T;
                p.timed = timed;
                return double(run(cfg, js, p, rng).displacement[0]);
            },
            true);
    };
    auto xs = mk(true), ys = mk(false);
    double mx = 0, my = 0, vx = 0, vy = 0;
    for (double v : xs) mx += v / M;
    for (double v : ys) my += v / M;
    for (double v : xs) vx += (v - mx) * (v - mx) / (M - 1.0);
    for (double v : ys) vy += (v - my) * (v - my) / (M - 1.0);
    double se = std::sqrt(vx / M + vy / M);
    CHECK(std::abs(mx - my) < 4.0 * se);
    // and the mean matches the exact stationary drift (1-rho) P1 T
    double p1 = 0.0;
    for (size_t i = 0; i < js.size(); ++i) p1 += double(js.entry(i)[0]) * js.entry_weight(i);
    CHECK(std::abs(mx - 0.5 * p1 * T) < 4.0 * std::sqrt(vx / M));
}
