#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "tagex/kernel.hpp"

namespace tagex {

// Symmetric long-jump walk with step law s(x) = ||x||^{-d-alpha} / s_star.
struct WalkSpec {
    int d = 1;
    double alpha = 1.0;
    double s_star_value = 0.0;
    int64_t near_radius = 0; // exact lattice window of the hybrid evaluator
    // half-space point cloud (x, 2 ||x||^{-d-alpha}) within the near window
    std::vector<std::array<int32_t, 3>> near_pts;
    std::vector<double> near_w;
    double near_mass = 0.0;

    static WalkSpec make(int d, double alpha, int64_t near_radius = 0);
};

// 1 - phi(theta) with phi the characteristic function of the step law.
// Exact lattice sum inside the near window; the remainder enters through its
// integral form at small |theta| and through the plain tail mass otherwise.
double one_minus_phi(const std::array<double, 3>& theta, const WalkSpec& spec);
inline double char_fn(const std::array<double, 3>& theta, const WalkSpec& spec) {
    return 1.0 - one_minus_phi(theta, spec);
}

// plain truncated sum + tail-mass bound, for cross-checks at a chosen radius
std::pair<double, double> char_fn_truncated(const std::array<double, 3>& theta, const WalkSpec& spec, int64_t radius);

struct ExponentFit {
    double exponent = 0.0;
    double ci = 0.0; // direction spread + fit standard error
    bool log_corrected = false;
    std::vector<double> per_direction;
};

// slope of log(1 - phi(r v)) vs log r over r in [1e-4, 1e-2], averaged over
// hemisphere directions; at alpha = 2 the r^2 |log r| correction is divided
// out first and the flag is set.
ExponentFit small_theta_exponent(const WalkSpec& spec);

enum class WalkClass { Recurrent, Transient };

struct Classification {
    WalkClass value = WalkClass::Transient;
    // shell contributions to the recurrence integral on shrinking scales,
    // innermost last; growing contributions corroborate recurrence
    std::vector<double> shell_integrals;
    double trend_ratio = 0.0; // last/previous shell
};

Classification classify(const WalkSpec& spec);

struct GreenResult {
    double value = 0.0;
    double coarse = 0.0;
    double rel_change = 0.0; // |value - coarse| / value
};

// g(0,0) = (2 pi)^{-d} integral of 1/(1 - phi) for transient specs.
GreenResult green_g00(const WalkSpec& spec);

// max residual of the lambda-resolvent identity
//   sum_y s(x-y)[g(z,y) - g(z,x)] = lambda g(z,x) - chi{x=z}
// on an L^d torus, after a dense solve for g.
double resolvent_identity_residual(const WalkSpec& spec, int64_t L, double lambda);

} // namespace tagex
