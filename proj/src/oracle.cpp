#include "tagex/oracle.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "tagex/linalg.hpp"
#include "tagex/numerics.hpp"
#include "tagex/rng.hpp"

namespace tagex {

using cplx = std::complex<double>;

namespace {

struct TorusGeom {
    int d;
    int64_t L, n_sites;
    int64_t flat(const std::array<int64_t, 3>& c) const {
        int64_t out = 0, base = 1;
        for (int j = 0; j < d; ++j) {
            out += ((c[size_t(j)] % L + L) % L) * base;
            base *= L;
        }
        return out;
    }
    std::array<int64_t, 3> coords(int64_t site) const {
        std::array<int64_t, 3> c{0, 0, 0};
        for (int j = 0; j < d; ++j) {
            c[size_t(j)] = site % L;
            site /= L;
        }
        return c;
    }
    int64_t add(int64_t site, int64_t shift) const {
        auto a = coords(site), b = coords(shift);
        for (int j = 0; j < d; ++j) a[size_t(j)] += b[size_t(j)];
        return flat(a);
    }
};

// displacement -> rate map folded onto the torus, plus the channel list
struct FoldedKernel {
    std::map<int64_t, double> rate;                       // torus shift -> total rate
    std::vector<std::pair<int64_t, Lv>> channels;         // (torus shift, z)
    std::vector<double> channel_rate;
};

FoldedKernel fold_kernel(const TorusGeom& g, const KernelSpec& spec, bool symmetric) {
    FoldedKernel fk;
    const int64_t R = spec.r_max, R2 = R * R;
    const int64_t ylim = (g.d >= 2) ? R : 0, zlim = (g.d >= 3) ? R : 0;
    for (int64_t a = -R; a <= R; ++a)
        for (int64_t b = -ylim; b <= ylim; ++b)
            for (int64_t c = -zlim; c <= zlim; ++c) {
                Lv z(g.d, a, b, c);
                if (z.is_zero() || z.norm2() > R2) continue;
                double w;
                if (symmetric) {
                    w = std::pow(double(z.norm2()), -0.5 * spec.s());
                } else {
                    w = eval_p(z, spec);
                    if (w == 0.0) continue;
                }
                int64_t shift = g.flat({a, b, c});
                fk.rate[shift] += w;
                fk.channels.emplace_back(shift, z);
                fk.channel_rate.push_back(w);
            }
    return fk;
}

} // namespace

GeneratorMatrix build_generator(GeneratorKind kind, int d, int64_t L, const KernelSpec& spec) {
    KernelSpec sp = spec;
    sp.d = d;
    if (sp.r_max > L / 2) throw std::invalid_argument("build_generator: r_max must not exceed L/2");
    sp.validate();
    TorusGeom g{d, L, 1};
    for (int j = 0; j < d; ++j) g.n_sites *= L;
    GeneratorMatrix gen;
    gen.kind = kind;
    gen.d = d;
    gen.L = L;
    gen.spec = sp;
    gen.bits = int((kind == GeneratorKind::Environment) ? g.n_sites - 1 : g.n_sites);
    if (gen.bits > 14) throw ResourceError("build_generator: state space exceeds 2^14");
    gen.n_states = uint64_t(1) << gen.bits;

    FoldedKernel fk = fold_kernel(g, sp, kind == GeneratorKind::SymmetricExclusion);

    if (kind != GeneratorKind::Environment) {
        // site x occupied, y empty: swap at rate k(y-x)
        for (uint64_t m = 0; m < gen.n_states; ++m) {
            for (int64_t x = 0; x < g.n_sites; ++x) {
                if (!((m >> x) & 1)) continue;
                for (auto& [shift, rate] : fk.rate) {
                    int64_t y = g.add(x, shift);
                    if ((m >> y) & 1) continue;
                    uint64_t m2 = (m & ~(uint64_t(1) << x)) | (uint64_t(1) << y);
                    gen.transitions.push_back({uint32_t(m), uint32_t(m2), rate, -1});
                }
            }
        }
        return gen;
    }

    // environment: bits index torus sites 1..n_sites-1
    auto env_bit = [&](int64_t site) { return int(site - 1); };
    for (auto& [shift, z] : fk.channels) gen.shift_z.push_back(z);
    for (uint64_t m = 0; m < gen.n_states; ++m) {
        auto occupied = [&](int64_t site) {
            if (site == 0) return true; // tagged particle
            return bool((m >> env_bit(site)) & 1);
        };
        // exchanges among the environment sites
        for (int64_t x = 1; x < g.n_sites; ++x) {
            if (!((m >> env_bit(x)) & 1)) continue;
            for (auto& [shift, rate] : fk.rate) {
                int64_t y = g.add(x, shift);
                if (y == 0 || occupied(y)) continue;
                uint64_t m2 = (m & ~(uint64_t(1) << env_bit(x))) | (uint64_t(1) << env_bit(y));
                gen.transitions.push_back({uint32_t(m), uint32_t(m2), rate, -1});
            }
        }
        // tagged jumps: xi -> theta_z xi when site z is empty
        for (size_t ch = 0; ch < fk.channels.size(); ++ch) {
            int64_t shift = fk.channels[ch].first;
            if (occupied(shift)) continue;
            uint64_t m2 = 0;
            auto sc = g.coords(shift);
            for (int j = 0; j < g.d; ++j) sc[size_t(j)] = -sc[size_t(j)];
            int64_t minus = g.flat(sc); // -shift on the torus
            for (int64_t x = 1; x < g.n_sites; ++x) {
                bool v;
                if (x == minus) v = false; // the vacated origin
                else v = occupied(g.add(x, shift));
                if (v) m2 |= uint64_t(1) << env_bit(x);
            }
            gen.transitions.push_back({uint32_t(m), uint32_t(m2), fk.channel_rate[ch], int32_t(ch)});
        }
    }
    return gen;
}

std::vector<double> nu_product(const GeneratorMatrix& gen, double rho) {
    std::vector<double> mu(gen.n_states);
    for (uint64_t m = 0; m < gen.n_states; ++m) {
        int pop = __builtin_popcountll(m);
        mu[m] = std::pow(rho, pop) * std::pow(1.0 - rho, gen.bits - pop);
    }
    return mu;
}

double check_stationarity(const GeneratorMatrix& gen, const std::vector<double>& mu) {
    if (mu.size() != gen.n_states) throw std::invalid_argument("check_stationarity: measure size mismatch");
    std::vector<double> resid(gen.n_states, 0.0);
    for (const auto& tr : gen.transitions) {
        double flow = mu[tr.from] * tr.rate;
        resid[tr.to] += flow;
        resid[tr.from] -= flow;
    }
    double worst = 0.0;
    for (double r : resid) worst = std::max(worst, std::abs(r));
    return worst;
}

static la::DenseC tilted_generator(const GeneratorMatrix& env, double beta, const std::array<double, 3>& a, double N,
                                   bool with_compensator) {
    if (env.kind != GeneratorKind::Environment)
        throw std::invalid_argument("tilted_generator: environment generator required");
    la::DenseC Q{int(env.n_states)};
    for (const auto& tr : env.transitions) {
        cplx w = tr.rate;
        if (tr.shift_channel >= 0) {
            const Lv& z = env.shift_z[size_t(tr.shift_channel)];
            double phase = beta * dot(z, a) / N;
            w *= cplx(std::cos(phase), std::sin(phase));
            if (with_compensator) Q(int(tr.from), int(tr.from)) -= (w - tr.rate);
        }
        Q(int(tr.from), int(tr.to)) += w;
        Q(int(tr.from), int(tr.from)) -= tr.rate;
    }
    return Q;
}

static cplx expectation_semigroup(const GeneratorMatrix& env, const la::DenseC& Q, double rho, double t) {
    la::DenseC Qt = Q;
    for (auto& v : Qt.a) v *= t;
    la::DenseC X = la::expm(Qt);
    auto mu = nu_product(env, rho);
    cplx out = 0.0;
    for (uint64_t i = 0; i < env.n_states; ++i) {
        cplx row = 0.0;
        for (uint64_t j = 0; j < env.n_states; ++j) row += X(int(i), int(j));
        out += mu[i] * row;
    }
    return out;
}

cplx martingale_mean(const GeneratorMatrix& env, double rho, double beta, const std::array<double, 3>& a, double N,
                     double t) {
    return expectation_semigroup(env, tilted_generator(env, beta, a, N, true), rho, t);
}

cplx displacement_cf(const GeneratorMatrix& env, double rho, double beta, const std::array<double, 3>& a, double t) {
    return expectation_semigroup(env, tilted_generator(env, beta, a, 1.0, false), rho, t);
}

double resolvent_quadratic(const GeneratorMatrix& gen, const std::vector<double>& f, double lambda,
                           const std::vector<double>& mu) {
    if (lambda <= 0.0) throw std::invalid_argument("resolvent_quadratic: lambda > 0 required");
    const int n = int(gen.n_states);
    la::DenseD M{n};
    for (int i = 0; i < n; ++i) M(i, i) = lambda;
    for (const auto& tr : gen.transitions) {
        M(int(tr.from), int(tr.to)) -= tr.rate;
        M(int(tr.from), int(tr.from)) += tr.rate;
    }
    auto x = la::solve(M, f);
    num::Kahan acc;
    for (int i = 0; i < n; ++i) acc.add(mu[size_t(i)] * f[size_t(i)] * x[size_t(i)]);
    return acc.get();
}

std::vector<double> psi_transform(const std::vector<double>& f, int bits, double rho) {
    std::vector<double> c = f;
    const double sig = std::sqrt(rho * (1.0 - rho));
    for (int j = 0; j < bits; ++j) {
        uint64_t stride = uint64_t(1) << j;
        for (uint64_t base = 0; base < c.size(); base += 2 * stride)
            for (uint64_t k = 0; k < stride; ++k) {
                double f0 = c[base + k], f1 = c[base + k + stride];
                c[base + k] = (1.0 - rho) * f0 + rho * f1;     // A without site j
                c[base + k + stride] = sig * (f1 - f0);        // A with site j
            }
    }
    return c;
}

PsiReport psi_basis_checks(int d, int64_t L, const KernelSpec& spec, double rho, uint64_t seed) {
    auto env = build_generator(GeneratorKind::Environment, d, L, spec);
    const int bits = env.bits;
    const uint64_t n_states = env.n_states;
    auto mu = nu_product(env, rho);
    const double sig = std::sqrt(rho * (1.0 - rho));
    auto psi = [&](uint64_t A, uint64_t xi) {
        double v = 1.0;
        for (int x = 0; x < bits; ++x)
            if ((A >> x) & 1) v *= (((xi >> x) & 1) ? (1.0 - rho) : -rho) / sig;
        return v;
    };
    PsiReport rep;
    rep.psi_empty_is_one = true;
    for (uint64_t xi = 0; xi < n_states; ++xi)
        if (psi(0, xi) != 1.0) rep.psi_empty_is_one = false;

    // orthonormality over all subset pairs
    for (uint64_t A = 0; A < n_states; ++A)
        for (uint64_t B = A; B < n_states; ++B) {
            num::Kahan ip;
            for (uint64_t xi = 0; xi < n_states; ++xi) ip.add(mu[xi] * psi(A, xi) * psi(B, xi));
            double want = (A == B) ? 1.0 : 0.0;
            rep.max_orthonormality_dev = std::max(rep.max_orthonormality_dev, std::abs(ip.get() - want));
        }

    // exchange identity Psi_A(xi^{x,y}) = Psi_{A \ x u y}(xi), x in A, y not in A
    for (uint64_t A = 0; A < n_states; ++A)
        for (int x = 0; x < bits; ++x) {
            if (!((A >> x) & 1)) continue;
            for (int y = 0; y < bits; ++y) {
                if ((A >> y) & 1) continue;
                uint64_t A2 = (A & ~(uint64_t(1) << x)) | (uint64_t(1) << y);
                for (uint64_t xi = 0; xi < n_states; ++xi) {
                    uint64_t bx = (xi >> x) & 1, by = (xi >> y) & 1;
                    uint64_t swapped = xi;
                    swapped &= ~((uint64_t(1) << x) | (uint64_t(1) << y));
                    swapped |= (by << x) | (bx << y);
                    rep.max_exchange_dev = std::max(rep.max_exchange_dev, std::abs(psi(A, swapped) - psi(A2, xi)));
                }
            }
        }

    // Dirichlet form identity for the exchange part, on random test functions
    TorusGeom g{d, L, 1};
    for (int j = 0; j < d; ++j) g.n_sites *= L;
    FoldedKernel fk = fold_kernel(g, env.spec, true);
    auto env_bit = [&](int64_t site) { return int(site - 1); };
    Rng rng(seed, 0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> f(n_states);
        for (auto& v : f) v = 2.0 * rng.uniform() - 1.0;
        // state-space side: sum over ordered pairs of s(y-x) xi(x)(1-xi(y)) (f(xi^{xy})-f(xi))^2 / 2
        num::Kahan lhs;
        for (uint64_t xi = 0; xi < n_states; ++xi) {
            for (int64_t x = 1; x < g.n_sites; ++x) {
                if (!((xi >> env_bit(x)) & 1)) continue;
                for (auto& [shift, rate] : fk.rate) {
                    int64_t y = g.add(x, shift);
                    if (y == 0) continue;
                    if ((xi >> env_bit(y)) & 1) continue;
                    uint64_t xi2 = (xi & ~(uint64_t(1) << env_bit(x))) | (uint64_t(1) << env_bit(y));
                    double df = f[xi2] - f[xi];
                    lhs.add(0.5 * mu[xi] * rate * df * df);
                }
            }
        }
        // coefficient side: (1/4) sum_{x,y} s(y-x) sum_A [f(A_{x,y}) - f(A)]^2
        auto fh = psi_transform(f, bits, rho);
        num::Kahan rhs;
        for (int64_t x = 1; x < g.n_sites; ++x)
            for (auto& [shift, rate] : fk.rate) {
                int64_t y = g.add(x, shift);
                if (y == 0) continue;
                for (uint64_t A = 0; A < n_states; ++A) {
                    uint64_t bx = (A >> env_bit(x)) & 1, by = (A >> env_bit(y)) & 1;
                    if (bx == by) continue; // A_{x,y} = A
                    uint64_t A2 = A;
                    A2 &= ~((uint64_t(1) << env_bit(x)) | (uint64_t(1) << env_bit(y)));
                    A2 |= (by << env_bit(x)) | (bx << env_bit(y));
                    double dc = fh[A2] - fh[A];
                    rhs.add(0.25 * rate * dc * dc);
                }
            }
        double rel = std::abs(lhs.get() - rhs.get()) / std::max(1e-300, std::abs(lhs.get()));
        rep.max_dirichlet_rel_dev = std::max(rep.max_dirichlet_rel_dev, rel);
    }
    return rep;
}

} // namespace tagex
