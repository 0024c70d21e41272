#pragma once

#include <array>
#include <complex>

#include "tagex/kernel.hpp"

namespace tagex {

enum class Regime { Sub, Critical, Super, Diffusive };

// Timescale gamma(N) and centering defining the rescaled tagged displacement
// per alpha regime, plus the law-of-large-numbers scalings.
struct RegimeScaling {
    Regime tag = Regime::Sub;
    double alpha = 0.5;
    KernelSpec spec;
    std::array<double, 3> m{0, 0, 0};  // mean drift, alpha > 1
    double gamma_d_value = 0.0;        // critical drift constant, alpha = 1

    double timescale(double N) const;
    std::array<double, 3> centering(double t, double N, double rho) const;

    double lln_horizon(double t, double N) const;
    // t-linear reading t(1-rho) gamma_d e1 at alpha = 1; t(1-rho) m for alpha > 1
    std::array<double, 3> lln_limit(double t, double rho) const;
    // verbatim reading of the critical limit: gamma_d e1, no t or density factor
    std::array<double, 3> lln_limit_literal() const;
};

RegimeScaling regime_for(double alpha, const KernelSpec& spec);

// Levy exponent Phi_{alpha,a}(beta): half-space integral of
// ||u||^{-d-alpha} (e^{i beta (u.a)} - compensator) with the regime-correct
// compensator (none / unit-ball indicator / full), and -beta^2/2 a^T D a at
// alpha = 2.
struct LevyExponent {
    double alpha = 0.5;
    int d = 1;
    std::array<double, 3> a{1, 0, 0};
    double rho = 0.0;
    enum class Method { RadialClosed, RadialQuad } method = Method::RadialClosed;
    double tol = 1e-8;
    DMatrix D; // required only at alpha = 2

    static LevyExponent make(double alpha, int d, std::array<double, 3> a, double rho);
};

std::complex<double> phi(double beta, const LevyExponent& ex);
std::complex<double> levy_cf(double beta, double t, const LevyExponent& ex);

// psi_alpha(s) = integral_0^inf r^{-1-alpha} (e^{isr} - compensator(r)) dr
std::complex<double> radial_profile(double s_arg, double alpha);
std::complex<double> radial_profile_quad(double s_arg, double alpha); // independent numeric route

} // namespace tagex
