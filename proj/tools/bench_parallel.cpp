// Compares the serial reference paths against the OpenMP paths and reports
// throughput: deterministic chunked lattice sums and the replica driver.

#include <chrono>
#include <cstdio>

#include <omp.h>

#include "tagex/experiments.hpp"
#include "tagex/kernel.hpp"
#include "tagex/numerics.hpp"
#include "tagex/process.hpp"

using namespace tagex;

template <class F>
static double time_ms(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

int main() {
    std::printf("threads available: %d\n\n", omp_get_max_threads());

    // lattice sum: exact d=2 drift sum at N = 3000
    KernelSpec k2{2, 1.0, 4};
    double v_ser = 0, v_par = 0;
    double t_ser = time_ms([&] {
        v_ser = num::par_sum(3000, [&](int64_t i) {
            double c = double(i + 1);
            num::Kahan acc;
            int64_t M = int64_t(std::sqrt(std::max(0.0, 3000.0 * 3000.0 - c * c)));
            for (int64_t x = -M; x <= M; ++x) acc.add(2.0 * c * std::pow(c * c + double(x) * x, -1.5));
            return acc.get();
        }, false);
    });
    double t_par = time_ms([&] {
        v_par = num::par_sum(3000, [&](int64_t i) {
            double c = double(i + 1);
            num::Kahan acc;
            int64_t M = int64_t(std::sqrt(std::max(0.0, 3000.0 * 3000.0 - c * c)));
            for (int64_t x = -M; x <= M; ++x) acc.add(2.0 * c * std::pow(c * c + double(x) * x, -1.5));
            return acc.get();
        }, true);
    });
    std::printf("lattice sum (d=2, N=3000): serial %.1f ms, parallel %.1f ms, speedup %.2fx, identical=%s\n", t_ser,
                t_par, t_ser / t_par, (v_ser == v_par) ? "yes" : "NO");

    // replica batch: 256 replicas of a rho=0.5 run
    KernelSpec k1{1, 1.0, 512};
    auto js = JumpSampler::build(k1);
    auto body = [&](int, Rng& rng) {
        auto cfg = Configuration::init_equilibrium(1, 1024, 0.5, rng, 512);
        RunParams p;
        p.T = 200.0;
        p.timed = false;
        return run(cfg, js, p, rng).displacement[0];
    };
    std::vector<int64_t> xs, ys;
    double r_ser = time_ms([&] { xs = run_replicas<int64_t>(256, 12345, body, false); });
    double r_par = time_ms([&] { ys = run_replicas<int64_t>(256, 12345, body, true); });
    bool same = (xs == ys);
    std::printf("replica batch (256 runs):   serial %.1f ms, parallel %.1f ms, speedup %.2fx, identical=%s\n", r_ser,
                r_par, r_ser / r_par, same ? "yes" : "NO");
    return (v_ser == v_par && same) ? 0 : 1;
}
