#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "tagex/kernel.hpp"

namespace tagex {

enum class GeneratorKind {
    Exclusion,          // full dynamics on the torus, kernel p wrapped
    Environment,        // as seen from the tagged particle: exchanges + shifts
    SymmetricExclusion, // exchange dynamics with the symmetric weights ||z||^{-d-alpha}
};

struct OracleTransition {
    uint32_t from = 0, to = 0;
    double rate = 0.0;
    int32_t shift_channel = -1; // index into shift_z when this is a tagged move
};

// Sparse rate matrix over an enumerated state space {0,1}^bits (bits <= 14).
struct GeneratorMatrix {
    GeneratorKind kind = GeneratorKind::Exclusion;
    int d = 1;
    int64_t L = 2;
    int bits = 0; // state bit count (sites, or sites-1 for the environment)
    uint64_t n_states = 0;
    KernelSpec spec;
    std::vector<OracleTransition> transitions;
    std::vector<Lv> shift_z; // jump vectors backing the tagged-move channels
};

// Torus kernel convention: all z with 0 < ||z|| <= r_max and p(z) > 0, folded
// mod L; several z may share one torus shift and stay separate channels.
GeneratorMatrix build_generator(GeneratorKind kind, int d, int64_t L, const KernelSpec& spec);

// product Bernoulli weights on the generator's state space; for the
// environment kind this is nu_rho conditioned on the occupied origin
std::vector<double> nu_product(const GeneratorMatrix& gen, double rho);

// || mu^T Q ||_inf
double check_stationarity(const GeneratorMatrix& gen, const std::vector<double>& mu);

// E[M_t(beta)] for the tagged exponential martingale: tagged-move rates are
// tilted by e^{i beta (z.a)/N} and the matching compensator is subtracted on
// the diagonal; the result must be 1.
std::complex<double> martingale_mean(const GeneratorMatrix& env, double rho, double beta,
                                     const std::array<double, 3>& a, double N, double t);

// E[e^{i beta (X_t . a)}] by tilting without the compensator
std::complex<double> displacement_cf(const GeneratorMatrix& env, double rho, double beta,
                                     const std::array<double, 3>& a, double t);

// <f, (lambda - Q)^{-1} f>_mu for a generator symmetric w.r.t. mu
double resolvent_quadratic(const GeneratorMatrix& gen, const std::vector<double>& f, double lambda,
                           const std::vector<double>& mu);

struct PsiReport {
    double max_orthonormality_dev = 0.0;
    double max_exchange_dev = 0.0;
    double max_dirichlet_rel_dev = 0.0;
    bool psi_empty_is_one = false;
};

// Orthonormal product basis Psi_A(xi) = prod_{x in A} (xi(x)-rho)/sqrt(rho(1-rho))
// on the environment sites: orthonormality, the exchange relabeling identity,
// and the coefficient-space Dirichlet form identity on random test functions.
PsiReport psi_basis_checks(int d, int64_t L, const KernelSpec& spec, double rho, uint64_t seed);

// coefficient transform f(A) = E[f Psi_A], indexed by site subsets
std::vector<double> psi_transform(const std::vector<double>& f, int bits, double rho);

} // namespace tagex
