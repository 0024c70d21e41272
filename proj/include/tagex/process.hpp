#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "tagex/kernel.hpp"
#include "tagex/limits.hpp"
#include "tagex/rng.hpp"

namespace tagex {

struct RunParams;
struct RunReport;
class Configuration;
RunReport run(Configuration& cfg, const JumpSampler& sampler, const RunParams& params, Rng& rng);

// Torus occupancy with an indexed particle list; the tagged particle is
// particle slot 0 and its site always stays occupied. Single-threaded by
// construction; parallelism lives at the replica level.
class Configuration {
public:
    // Bernoulli(rho) sites conditioned on an occupied origin. With
    // `canonical` set, exactly round(rho L^d) particles are placed instead
    // (the conserved-density mode is then frozen).
    static Configuration init_equilibrium(int d, int64_t L, double rho, Rng& rng, int64_t sampler_r_max,
                                          bool canonical = false);
    // explicit occupancy for small deterministic tests; `sites` are flat indices
    static Configuration from_sites(int d, int64_t L, const std::vector<int64_t>& sites, int64_t tagged_site,
                                    int64_t sampler_r_max);

    int d() const { return d_; }
    int64_t L() const { return L_; }
    int64_t n_sites() const { return n_sites_; }
    int64_t n_particles() const { return int64_t(particles_.size()); }
    double rho() const { return rho_; }
    double clock() const { return clock_; }
    const std::array<int64_t, 3>& displacement() const { return displacement_; }
    int64_t tagged_site() const { return int64_t(particles_[0]); }

    bool occupied(int64_t site) const { return (occ_[size_t(site >> 6)] >> (site & 63)) & 1; }
    // occupancy seen from the tagged particle: xi(z) = eta(tagged + z)
    bool env(const Lv& z) const { return occupied(wrap_add(particles_[0], z)); }

    int64_t wrap_add(int64_t site, const Lv& z) const { return wrap_add_raw(site, z.c.data()); }
    int64_t wrap_add_raw(int64_t site, const int64_t* z) const;
    int64_t wrap_add_raw32(int64_t site, const int32_t* z) const;
    Lv site_coords(int64_t site) const;

    // One thinning step: advance the clock, propose (particle, jump), move if
    // the destination is empty. Returns true if a particle moved.
    struct Event {
        double dt = 0.0;
        bool accepted = false;
        bool tagged = false;
        Lv z;
    };
    Event step(const JumpSampler& sampler, Rng& rng);

    // Apply one proposal without clock bookkeeping (fixed-event-count mode).
    bool apply_proposal(const JumpSampler& sampler, Rng& rng);

    void advance_clock(double dt) { clock_ += dt; }

private:
    int d_ = 1;
    int64_t L_ = 2, n_sites_ = 2;
    int log2_L_ = -1; // >= 0 when L is a power of two
    double rho_ = 0.0;
    double clock_ = 0.0;
    std::array<int64_t, 3> displacement_{0, 0, 0};
    std::vector<uint64_t> occ_;
    std::vector<int32_t> particles_; // flat sites; L^d stays below 2^31

    void set_occ(int64_t site) { occ_[size_t(site >> 6)] |= (uint64_t(1) << (site & 63)); }
    void clear_occ(int64_t site) { occ_[size_t(site >> 6)] &= ~(uint64_t(1) << (site & 63)); }
    friend RunReport run(Configuration&, const JumpSampler&, const RunParams&, Rng&);
};

struct RunParams {
    double T = 0.0;                       // physical horizon
    std::vector<Lv> watch_sites;          // relative to the tagged particle
    std::vector<int64_t> watch_absolute;  // fixed lattice sites (flat indices)
    std::vector<double> checkpoints;      // increasing times <= T
    bool track_jump_counters = false;     // per-direction tagged jump counts
    bool timed = true;                    // false: fixed-count thinning without clocks
    bool record_events = false;           // append-only event log (timed mode)
};

// one proposal: accepted=false exactly when the destination was occupied
struct EventRecord {
    double time = 0.0;
    int64_t site = 0; // proposer location before the move
    Lv z;
    bool accepted = false;
    bool tagged = false;
};

struct RunReport {
    int d = 1;
    int64_t L = 0;
    double rho = 0.0, T = 0.0;
    uint64_t seed = 0;
    std::array<int64_t, 3> displacement{0, 0, 0};
    uint64_t proposals = 0, accepted = 0, tagged_proposals = 0, tagged_accepted = 0;
    // occupation integrals int_0^T (rho - xi_s(z)) ds per watcher
    std::vector<double> occupation;
    std::vector<double> occupation_absolute;
    // snapshots at the requested checkpoint times
    std::vector<std::array<int64_t, 3>> checkpoint_displacement;
    std::vector<std::vector<double>> checkpoint_occupation;          // per checkpoint, per watcher
    std::vector<std::vector<double>> checkpoint_occupation_absolute; // per checkpoint, per absolute watcher
    std::unordered_map<uint64_t, uint64_t> jump_counters;            // pack_key(z) -> N_T^z
    std::vector<EventRecord> events;
    double dropped_mass = 0.0;
};

// Runs the exclusion dynamics to params.T. Exact continuous-time law: either
// exponential clocks (timed) or a Poisson-distributed proposal count per
// segment (endpoint statistics only).
RunReport run(Configuration& cfg, const JumpSampler& sampler, const RunParams& params, Rng& rng);

// (X_{t gamma(N)} - centering(t, N, rho)) / N per regime
std::array<double, 3> rescaled_endpoint(const RunReport& report, double t, double N, const RegimeScaling& scaling);

// Replica driver: one independent stream per replica index, results merged in
// index order so the outcome does not depend on the thread count.
template <class R, class F>
std::vector<R> run_replicas(int n_replicas, uint64_t master_seed, F&& body, bool parallel = true) {
    std::vector<R> out;
    out.resize(size_t(n_replicas));
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < n_replicas; ++i) {
        Rng rng{master_seed, uint64_t(i)};
        out[size_t(i)] = body(i, rng);
    }
    return out;
}

} // namespace tagex
