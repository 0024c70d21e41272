#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "tagex/rng.hpp"

namespace tagex {

// Empirical characteristic function with per-beta standard errors.
struct ECFTable {
    std::array<double, 3> a{1, 0, 0};
    std::vector<double> beta;
    std::vector<std::complex<double>> mean;
    std::vector<double> se; // sqrt((var_re + var_im)/M)
    size_t n_samples = 0;
};

ECFTable ecf(const std::vector<std::array<double, 3>>& samples, const std::array<double, 3>& a,
             const std::vector<double>& beta_grid);

struct CfDistance {
    double sup_sigma = 0.0; // max over beta of (|mean - target| - bias)_+ / se
    std::vector<double> per_beta_sigma;
    std::vector<std::complex<double>> target;
    std::vector<double> bias;
    double fitted_phase = 0.0; // slope of the affine-in-beta phase, when fitted
};

// Deviation of an ECF from a target CF in standard-error units. `bias` is a
// per-beta deterministic allowance (e.g. the exactly computable truncation
// envelope), subtracted from the deviation before dividing by the standard
// error. With `fit_phase` one affine phase e^{i beta c} is fitted first.
CfDistance cf_distance(const ECFTable& table, const std::function<std::complex<double>(double)>& target,
                       const std::function<double(double)>& bias = nullptr, bool fit_phase = false);

struct LlnEstimate {
    std::array<double, 3> mean{0, 0, 0};
    std::array<double, 3> ci_half{0, 0, 0}; // bootstrap 95%
    std::array<double, 3> predicted{0, 0, 0};
    double rel_deviation = 0.0; // ||mean - predicted|| / ||predicted||
    double rel_deviation_se = 0.0;
};

LlnEstimate lln_estimate(const std::vector<std::array<double, 3>>& scaled_endpoints, int d,
                         const std::array<double, 3>& predicted, uint64_t seed, int n_boot = 300);

struct ScalingFit {
    std::vector<double> horizons;
    std::vector<double> variance;
    double exponent = 0.0;
    double ci_half = 0.0; // bootstrap 95% over replicas
    double predicted_exponent = 1.0;
    bool log_flag = false;           // a logarithmic factor is predicted, not fitted
    std::string log_kind;
};

// log-log fit of Var(occupation integral) against the horizon; integrals is
// indexed [replica][horizon] and may pool several watched sites per replica.
ScalingFit occupation_variance_fit(const std::vector<double>& horizons,
                                   const std::vector<std::vector<double>>& integrals, int d, double alpha,
                                   uint64_t seed, int n_boot = 300);

// mean and 95% bootstrap CI of a scalar sample
std::array<double, 2> bootstrap_mean_ci(const std::vector<double>& xs, uint64_t seed, int n_boot = 300);

} // namespace tagex
