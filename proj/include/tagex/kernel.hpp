#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tagex/lattice.hpp"
#include "tagex/rng.hpp"

namespace tagex {

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RegimeError : std::domain_error {
    using std::domain_error::domain_error;
};

// Jump kernel p(z) = ||z||^{-d-alpha} (2 if z1>0, 1 if z1=0, 0 if z1<0), p(0)=0.
struct KernelSpec {
    int d = 1;
    double alpha = 1.0;
    int64_t r_max = 1; // truncation radius for sampling/simulation only

    void validate() const {
        if (d < 1 || d > 3) throw std::invalid_argument("KernelSpec: d must be 1, 2 or 3");
        if (!(alpha > 0.0) || alpha > 2.0) throw std::invalid_argument("KernelSpec: alpha must lie in (0,2]");
        if (r_max < 1) throw std::invalid_argument("KernelSpec: r_max >= 1 required");
    }
    double s() const { return d + alpha; } // decay exponent
};

double eval_p(const Lv& z, const KernelSpec& spec);
// continuous extension to R^d \ {0}; satisfies p(u/N) = N^{d+alpha} p(u)
double eval_p_continuous(const std::array<double, 3>& u, const KernelSpec& spec);
// symmetric step law s(z) = ||z||^{-d-alpha} / s_star; throws on z = 0
double eval_s(const Lv& z, const KernelSpec& spec);

struct SumResult {
    double value = 0.0;
    double abs_error = 0.0;
};

// s_star = sum_{z != 0} ||z||^{-d-alpha}; also the total jump rate.
SumResult s_star(const KernelSpec& spec);
// total rate sum_z p(z); equals s_star by the mirror symmetry of the kernel
SumResult total_rate(const KernelSpec& spec);
// m = sum_z z p(z) (alpha > 1); coordinates 2..d vanish
std::array<SumResult, 3> mean_m(const KernelSpec& spec, double tol = 1e-9);

// exact finite sum sum_{||z|| <= N} z p(z); only the first coordinate is nonzero
std::array<double, 3> drift_sum(int64_t N, const KernelSpec& spec);
// second-moment sums S_j(N) = sum_{||z|| <= N} z_j^2 p(z)
std::array<double, 3> second_moment_sum(int64_t N, const KernelSpec& spec);

struct Extrapolation {
    double value = 0.0;
    double abs_error = 0.0;
    std::vector<std::pair<int64_t, double>> table; // (N, partial/log N)
};

// gamma_d = lim (1/log N) sum_{||z||<=N} z1 p(z), alpha = 1 only.
// Fits a + b/log N over a geometric N grid.
Extrapolation gamma_d(const KernelSpec& spec, std::vector<int64_t> grid = {});

struct DMatrix {
    int d = 1;
    double v[3][3] = {{0}};
    double err[3][3] = {{0}};
};

// D_ij = lim (1/log N) sum_{||z||<=N} z_i z_j p(z), alpha = 2 only.
// Off-diagonals vanish exactly by the z_i -> -z_i sign symmetry.
DMatrix D_matrix(const KernelSpec& spec, std::vector<int64_t> grid = {});

// Exact sampler for p restricted to ||z|| <= r_max (alias table over all
// lattice points with positive mass).
class JumpSampler {
public:
    static JumpSampler build(const KernelSpec& spec);
    // symmetric step weights ||z||^{-d-alpha} on all 0 < ||z|| <= r_max;
    // drives the symmetric exclusion dynamics through the same thinning loop
    static JumpSampler build_symmetric(const KernelSpec& spec);

    // one interleaved record per entry keeps a draw inside one cache line
    struct Entry {
        double prob;
        uint32_t alias;
        int32_t dz[3];
    };

    // two-level composition: nearly all of the mass sits in a small head
    // table that stays cache resident; the far tail is drawn rarely
    const Entry& draw(Rng& rng) const {
        const std::vector<Entry>& part = (tail_.empty() || rng.uniform() < head_mass_frac_) ? head_ : tail_;
        uint64_t i = rng.below(part.size());
        double u = rng.uniform();
        const Entry& e = part[i];
        return (u < e.prob) ? e : part[e.alias];
    }

    Lv sample(Rng& rng) const {
        const Entry& e = draw(rng);
        return Lv(d_, e.dz[0], e.dz[1], e.dz[2]);
    }

    // total truncated mass P(r_max) = sum of kernel weights in the table
    double truncated_mass() const { return trunc_mass_; }
    // rate discarded by the truncation: total_rate - P(r_max)
    double dropped_mass() const { return dropped_mass_; }

    size_t size() const { return n_; }
    Lv entry(size_t i) const { return Lv(d_, dz_[0][i], dz_[1][i], dz_[2][i]); }
    double entry_weight(size_t i) const { return weight_[i]; }
    double entry_probability(size_t i) const { return weight_[i] / trunc_mass_; }
    // characteristic exponent of the truncated compound jump process:
    // sum_z (e^{i beta (z.a)} - 1) p(z) over the table
    std::array<double, 2> cf_exponent(double beta, const std::array<double, 3>& a) const;

    int d() const { return d_; }
    int64_t r_max() const { return r_max_; }

private:
    int d_ = 1;
    int64_t r_max_ = 1;
    uint64_t n_ = 0;
    double trunc_mass_ = 0.0, dropped_mass_ = 0.0;
    std::array<std::vector<int32_t>, 3> dz_;
    std::vector<double> weight_;
    std::vector<Entry> head_, tail_;
    double head_mass_frac_ = 1.0;
    friend JumpSampler sampler_common(const KernelSpec& spec, bool symmetric);
};

} // namespace tagex
