#include "tagex/process.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tagex {

static int ilog2_exact(int64_t L) {
    if (L < 2 || (L & (L - 1)) != 0) return -1;
    int k = 0;
    while ((int64_t(1) << k) < L) ++k;
    return k;
}

template <class ZT>
static inline int64_t wrap_add_impl(int64_t site, const ZT* z, int d, int64_t L, int log2_L) {
    int64_t out = 0;
    if (log2_L >= 0) {
        const int64_t mask = L - 1;
        int shift = 0;
        for (int j = 0; j < d; ++j) {
            int64_t cj = ((site >> shift) + z[j] + L) & mask;
            out |= cj << shift;
            shift += log2_L;
        }
        return out;
    }
    int64_t base = 1;
    int64_t rem = site;
    for (int j = 0; j < d; ++j) {
        int64_t cj = rem % L;
        rem /= L;
        cj += z[j] % L;
        if (cj < 0) cj += L;
        if (cj >= L) cj -= L;
        out += cj * base;
        base *= L;
    }
    return out;
}

int64_t Configuration::wrap_add_raw(int64_t site, const int64_t* z) const {
    return wrap_add_impl(site, z, d_, L_, log2_L_);
}
int64_t Configuration::wrap_add_raw32(int64_t site, const int32_t* z) const {
    return wrap_add_impl(site, z, d_, L_, log2_L_);
}

Lv Configuration::site_coords(int64_t site) const {
    Lv v = Lv::zero(d_);
    int64_t rem = site;
    for (int j = 0; j < d_; ++j) {
        v[j] = rem % L_;
        rem /= L_;
    }
    return v;
}

Configuration Configuration::init_equilibrium(int d, int64_t L, double rho, Rng& rng, int64_t sampler_r_max,
                                              bool canonical) {
    if (L < 2 * sampler_r_max) throw std::invalid_argument("init_equilibrium: L >= 2*r_max required");
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("init_equilibrium: rho in [0,1] required");
    Configuration c;
    c.d_ = d;
    c.L_ = L;
    c.log2_L_ = ilog2_exact(L);
    c.n_sites_ = 1;
    for (int j = 0; j < d; ++j) c.n_sites_ *= L;
    c.rho_ = rho;
    c.occ_.assign(size_t((c.n_sites_ + 63) / 64), 0);
    c.particles_.clear();
    c.particles_.push_back(0); // tagged particle at the origin
    c.set_occ(0);
    if (!canonical) {
        for (int64_t site = 1; site < c.n_sites_; ++site) {
            if (rng.uniform() < rho) {
                c.set_occ(site);
                c.particles_.push_back(int32_t(site));
            }
        }
    } else {
        int64_t K = std::llround(rho * double(c.n_sites_));
        K = std::max<int64_t>(K, 1);
        std::vector<int64_t> pool(size_t(c.n_sites_ - 1));
        for (int64_t i = 1; i < c.n_sites_; ++i) pool[size_t(i - 1)] = i;
        for (int64_t k = 0; k < K - 1; ++k) {
            uint64_t j = k + rng.below(uint64_t(pool.size() - uint64_t(k)));
            std::swap(pool[size_t(k)], pool[size_t(j)]);
            c.set_occ(pool[size_t(k)]);
            c.particles_.push_back(int32_t(pool[size_t(k)]));
        }
    }
    return c;
}

Configuration Configuration::from_sites(int d, int64_t L, const std::vector<int64_t>& sites, int64_t tagged_site,
                                        int64_t sampler_r_max) {
    if (L < 2 * sampler_r_max) throw std::invalid_argument("from_sites: L >= 2*r_max required");
    Configuration c;
    c.d_ = d;
    c.L_ = L;
    c.log2_L_ = ilog2_exact(L);
    c.n_sites_ = 1;
    for (int j = 0; j < d; ++j) c.n_sites_ *= L;
    c.occ_.assign(size_t((c.n_sites_ + 63) / 64), 0);
    c.particles_.push_back(int32_t(tagged_site));
    c.set_occ(tagged_site);
    for (int64_t s : sites) {
        if (s == tagged_site) continue;
        if (c.occupied(s)) throw std::invalid_argument("from_sites: duplicate site");
        c.set_occ(s);
        c.particles_.push_back(int32_t(s));
    }
    c.rho_ = double(c.particles_.size()) / double(c.n_sites_);
    return c;
}

Configuration::Event Configuration::step(const JumpSampler& sampler, Rng& rng) {
    Event ev;
    double rate = double(particles_.size()) * sampler.truncated_mass();
    ev.dt = rng.exponential(rate);
    clock_ += ev.dt;
    uint64_t slot = rng.below(uint64_t(particles_.size()));
    ev.z = sampler.sample(rng);
    ev.tagged = (slot == 0);
    int64_t from = particles_[size_t(slot)];
    int64_t to = wrap_add(from, ev.z);
    if (!occupied(to)) {
        ev.accepted = true;
        clear_occ(from);
        set_occ(to);
        particles_[size_t(slot)] = int32_t(to);
        if (slot == 0)
            for (int j = 0; j < d_; ++j) displacement_[size_t(j)] += ev.z[j];
    }
    return ev;
}

bool Configuration::apply_proposal(const JumpSampler& sampler, Rng& rng) {
    uint64_t slot = rng.below(uint64_t(particles_.size()));
    Lv z = sampler.sample(rng);
    int64_t from = particles_[size_t(slot)];
    int64_t to = wrap_add(from, z);
    if (occupied(to)) return false;
    clear_occ(from);
    set_occ(to);
    particles_[size_t(slot)] = int32_t(to);
    if (slot == 0)
        for (int j = 0; j < d_; ++j) displacement_[size_t(j)] += z[j];
    return true;
}

RunReport run(Configuration& cfg, const JumpSampler& sampler, const RunParams& params, Rng& rng) {
    RunReport rep;
    rep.d = cfg.d();
    rep.L = cfg.L();
    rep.rho = cfg.rho();
    rep.T = params.T;
    rep.dropped_mass = sampler.dropped_mass();
    rep.occupation.assign(params.watch_sites.size(), 0.0);
    rep.occupation_absolute.assign(params.watch_absolute.size(), 0.0);

    const double rho = cfg.rho();
    std::vector<double> cps = params.checkpoints;
    std::sort(cps.begin(), cps.end());

    // at moderate densities it is cheaper to propose from uniform sites (rate
    // n_sites * P, occupancy-gated) than to keep the particle list hot
    // worthwhile only once the slot array outgrows the cache; the occupancy
    // bitset stays small far longer
    const bool site_mode = !params.timed && !params.track_jump_counters &&
                           3 * cfg.n_particles() >= cfg.n_sites() && cfg.n_particles() >= 65536;
    const double rate =
        (site_mode ? double(cfg.n_sites()) : double(cfg.n_particles())) * sampler.truncated_mass();

    if (!params.timed) {
        if (!params.watch_sites.empty() || !params.watch_absolute.empty())
            throw std::invalid_argument("run: occupation watchers need the timed mode");
        // proposal count over a fixed window is Poisson(rate * dt); given the
        // count, the proposal sequence is iid, so endpoint laws are exact
        double t0 = 0.0;
        auto run_segment = [&](double t1) {
            double lambda = rate * (t1 - t0);
            if (lambda > 0) {
                std::poisson_distribution<int64_t> pd(lambda);
                int64_t K = pd(rng);
                if (params.track_jump_counters) {
                    for (int64_t k = 0; k < K; ++k) {
                        ++rep.proposals;
                        uint64_t slot = rng.below(uint64_t(cfg.n_particles()));
                        Lv z = sampler.sample(rng);
                        bool tagged = (slot == 0);
                        int64_t from = cfg.particles_[size_t(slot)];
                        int64_t to = cfg.wrap_add(from, z);
                        if (tagged) ++rep.tagged_proposals;
                        if (!cfg.occupied(to)) {
                            ++rep.accepted;
                            cfg.clear_occ(from);
                            cfg.set_occ(to);
                            cfg.particles_[size_t(slot)] = int32_t(to);
                            if (tagged) {
                                ++rep.tagged_accepted;
                                for (int j = 0; j < cfg.d(); ++j) cfg.displacement_[size_t(j)] += z[j];
                                ++rep.jump_counters[pack_key(z)];
                            }
                        }
                    }
                } else if (!site_mode) {
                    const uint64_t n = uint64_t(cfg.n_particles());
                    int32_t* ps = cfg.particles_.data();
                    uint64_t accepted = 0;
                    for (int64_t k = 0; k < K; ++k) {
                        uint64_t slot = rng.below(n);
                        const auto& e = sampler.draw(rng);
                        int64_t from = ps[slot];
                        int64_t to = cfg.wrap_add_raw32(from, e.dz);
                        if (!cfg.occupied(to)) {
                            ++accepted;
                            cfg.clear_occ(from);
                            cfg.set_occ(to);
                            ps[slot] = int32_t(to);
                            if (slot == 0)
                                for (int j = 0; j < cfg.d(); ++j) cfg.displacement_[size_t(j)] += e.dz[j];
                        }
                    }
                    rep.proposals += uint64_t(K);
                    rep.accepted += accepted;
                } else {
                    // dense regime: propose from a uniform site at total rate
                    // n_sites * P; empty proposers are null events, so only the
                    // occupancy bitset is touched
                    const uint64_t ns = uint64_t(cfg.n_sites());
                    uint64_t accepted = 0;
                    int64_t tagged = cfg.particles_[0];
                    for (int64_t k = 0; k < K; ++k) {
                        int64_t site = int64_t(rng.below(ns));
                        if (!cfg.occupied(site)) continue;
                        const auto& e = sampler.draw(rng);
                        int64_t to = cfg.wrap_add_raw32(site, e.dz);
                        if (cfg.occupied(to)) continue;
                        ++accepted;
                        cfg.clear_occ(site);
                        cfg.set_occ(to);
                        if (site == tagged) {
                            tagged = to;
                            for (int j = 0; j < cfg.d(); ++j) cfg.displacement_[size_t(j)] += e.dz[j];
                        }
                    }
                    rep.proposals += uint64_t(K);
                    rep.accepted += accepted;
                    cfg.particles_[0] = int32_t(tagged);
                }
            }
            cfg.advance_clock(t1 - t0);
            t0 = t1;
        };
        for (double cp : cps) {
            run_segment(cp);
            rep.checkpoint_displacement.push_back(cfg.displacement());
        }
        run_segment(params.T);
        if (site_mode) {
            // the fast path moves occupancy bits only; rebuild the slot list
            int64_t tagged = cfg.particles_[0];
            cfg.particles_.clear();
            cfg.particles_.push_back(int32_t(tagged));
            for (int64_t s = 0; s < cfg.n_sites(); ++s)
                if (s != tagged && cfg.occupied(s)) cfg.particles_.push_back(int32_t(s));
        }
        rep.displacement = cfg.displacement();
        return rep;
    }

    size_t next_cp = 0;
    double t_paid = 0.0;
    auto pay = [&](double until) {
        double dt = until - t_paid;
        if (dt <= 0.0) return;
        for (size_t w = 0; w < params.watch_sites.size(); ++w)
            rep.occupation[w] += (rho - (cfg.env(params.watch_sites[w]) ? 1.0 : 0.0)) * dt;
        for (size_t w = 0; w < params.watch_absolute.size(); ++w)
            rep.occupation_absolute[w] += (rho - (cfg.occupied(params.watch_absolute[w]) ? 1.0 : 0.0)) * dt;
        t_paid = until;
    };
    while (true) {
        double t_next = t_paid + rng.exponential(rate);
        while (next_cp < cps.size() && cps[next_cp] <= std::min(t_next, params.T)) {
            pay(cps[next_cp]);
            rep.checkpoint_displacement.push_back(cfg.displacement());
            rep.checkpoint_occupation.push_back(rep.occupation);
            rep.checkpoint_occupation_absolute.push_back(rep.occupation_absolute);
            ++next_cp;
        }
        if (t_next >= params.T) {
            pay(params.T);
            break;
        }
        pay(t_next);
        ++rep.proposals;
        uint64_t slot = rng.below(uint64_t(cfg.n_particles()));
        Lv z = sampler.sample(rng);
        bool tagged = (slot == 0);
        if (tagged) ++rep.tagged_proposals;
        int64_t from = cfg.particles_[size_t(slot)];
        int64_t to = cfg.wrap_add(from, z);
        if (params.record_events) rep.events.push_back({t_next, from, z, !cfg.occupied(to), tagged});
        if (!cfg.occupied(to)) {
            ++rep.accepted;
            cfg.clear_occ(from);
            cfg.set_occ(to);
            cfg.particles_[size_t(slot)] = int32_t(to);
            if (tagged) {
                ++rep.tagged_accepted;
                for (int j = 0; j < cfg.d(); ++j) cfg.displacement_[size_t(j)] += z[j];
                if (params.track_jump_counters) ++rep.jump_counters[pack_key(z)];
            }
        }
    }
    cfg.advance_clock(params.T);
    rep.displacement = cfg.displacement();
    return rep;
}

std::array<double, 3> rescaled_endpoint(const RunReport& report, double t, double N, const RegimeScaling& scaling) {
    double horizon = t * scaling.timescale(N);
    if (std::abs(report.T - horizon) > 1e-9 * std::max(1.0, horizon))
        throw std::invalid_argument("rescaled_endpoint: report horizon does not match t*gamma(N)");
    auto c = scaling.centering(t, N, report.rho);
    std::array<double, 3> out{0, 0, 0};
    for (int j = 0; j < report.d; ++j) out[size_t(j)] = (double(report.displacement[size_t(j)]) - c[size_t(j)]) / N;
    return out;
}

} // namespace tagex
