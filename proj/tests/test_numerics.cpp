#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tagex/numerics.hpp"
#include "oracles.hpp"

using namespace tagex;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    auto f = [](double x) { return 5.0 * x * x * x * x - 2.0 * x + 1.0; };
    double got = num::gl_integrate(f, -1.0, 2.0, 16);
    double want = (std::pow(2.0, 5) - std::pow(-1.0, 5)) - (4.0 - 1.0) + 3.0;
    CHECK(got == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("pow_tail matches zeta") {
    CHECK(num::pow_tail(1.0, 2.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-13));
    CHECK(num::pow_tail(1.0, 1.5) == doctest::Approx(oracles::zeta(1.5)).epsilon(1e-12));
    CHECK(num::pow_tail(3.0, 2.5) ==
          doctest::Approx(oracles::zeta(2.5) - 1.0 - std::pow(2.0, -2.5)).epsilon(1e-12));
}

TEST_CASE("offset_power_sum against brute force") {
    for (double q : {0.5, 4.0, 700.0, 3000.0}) {
        for (double s : {1.5, 3.0, 4.0, 4.7}) {
            double brute = 0.0;
            for (int64_t x = 2000000; x >= 1; --x) brute += std::pow(q + double(x) * x, -0.5 * s);
            // tail beyond the brute cutoff
            double X = 2000000.5;
            brute += std::pow(X, 1.0 - s) / (s - 1.0) * std::pow(1.0 + q / (X * X), -0.5 * s);
            double got = num::offset_power_sum(q, 1, -1, s);
            CHECK(got == doctest::Approx(brute).epsilon(1e-10));
        }
    }
    // finite upper limit
    double brute = 0.0;
    for (int64_t x = 0; x <= 777; ++x) brute += std::pow(10.0 + double(x) * x, -1.25);
    CHECK(num::offset_power_sum(10.0, 0, 777, 2.5) == doctest::Approx(brute).epsilon(1e-11));
}

TEST_CASE("half_integral closed forms agree with quadrature") {
    for (double s : {1.5, 2.0, 2.7, 3.0, 4.0, 5.0}) {
        for (double y : {0.3, 1.0, 2.5, 40.0}) {
            double brute = oracles::simpson([&](double t) { return std::pow(1.0 + t * t, -0.5 * s); }, 0.0, y, 20000);
            CHECK(num::half_integral(y, s) == doctest::Approx(brute).epsilon(1e-9));
        }
    }
}

TEST_CASE("oscillatory tails against brute panels") {
    for (double k : {0.3, 1.0, 4.0}) {
        double brute = oracles::simpson([&](double r) { return std::cos(k * r) * std::pow(r, -2.5); }, 20.0, 4000.0,
                                        2000000);
        CHECK(std::abs(num::osc_cos_tail(20.0, k, 2.5) - brute) < 1e-8);
        double bruteS = oracles::simpson([&](double r) { return std::sin(k * r) * std::pow(r, -2.5); }, 20.0, 4000.0,
                                         2000000);
        CHECK(std::abs(num::osc_sin_tail(20.0, k, 2.5) - bruteS) < 1e-8);
    }
}

TEST_CASE("deterministic chunked sum: serial equals parallel") {
    auto term = [](int64_t i) { return std::sin(0.001 * double(i)) / (1.0 + double(i)); };
    double ser = num::par_sum(1000000, term, false);
    double par = num::par_sum(1000000, term, true);
    CHECK(ser == par); // bit-identical by construction
}
