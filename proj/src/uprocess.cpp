#include "ustat/uprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ustat/reduce.hpp"
#include "ustat/resampling.hpp"

namespace ustat {

double FiniteKernelClass::eval(int member, int i, int j, std::span<const double> zi,
                               std::span<const double> zj) const {
    const double v = members[static_cast<std::size_t>(member)].evaluate(i, j, zi, zj);
    if (has_envelope) {
        const double cap = envelope.evaluate(i, j, zi, zj);
        if (std::abs(v) > std::abs(cap) * (1.0 + 1e-12) + 1e-300)
            throw std::runtime_error("kernel class: envelope domination violated");
    }
    if (uniform_bound > 0.0 && std::abs(v) > uniform_bound * (1.0 + 1e-12))
        throw std::runtime_error("kernel class: uniform bound violated");
    return v;
}

namespace {

SupResult sup_over_members(const FiniteKernelClass& cls,
                           const std::function<double(int)>& member_stat) {
    if (cls.members.empty()) throw std::invalid_argument("kernel class: empty");
    SupResult res;
    res.value = -1.0;
    for (int m = 0; m < static_cast<int>(cls.members.size()); ++m) {
        const double v = std::abs(member_stat(m));
        if (v > res.value) {
            res.value = v;
            res.argmax = m;
        }
    }
    return res;
}

}  // namespace

SupResult sup_ustat(const FiniteKernelClass& cls, const SampleBatch& z,
                    const SampleBatch& zp, std::span<const double> eps,
                    std::span<const double> eps_prime, bool parallel) {
    const reduce::PairIndexer pairs{static_cast<std::size_t>(z.n)};
    return sup_over_members(cls, [&](int m) {
        return reduce::indexed_sum(
            pairs.count(),
            [&](std::size_t k) {
                const auto [i, j] = pairs(k);
                return eps[i] * eps_prime[j] *
                       cls.eval(m, static_cast<int>(i), static_cast<int>(j),
                                z.row(static_cast<int>(i)), zp.row(static_cast<int>(j)));
            },
            parallel);
    });
}

SupResult sup_ustat_symmetrized(const FiniteKernelClass& cls, const SampleBatch& x,
                                std::span<const double> eps, bool parallel) {
    const reduce::PairIndexer pairs{static_cast<std::size_t>(x.n)};
    return sup_over_members(cls, [&](int m) {
        return reduce::indexed_sum(
            pairs.count(),
            [&](std::size_t k) {
                const auto [i, j] = pairs(k);
                return eps[i] * eps[j] *
                       cls.eval(m, static_cast<int>(i), static_cast<int>(j),
                                x.row(static_cast<int>(i)), x.row(static_cast<int>(j)));
            },
            parallel);
    });
}

DiscreteMeasure DiscreteMeasure::from_support(const FiniteSupport& s) {
    DiscreteMeasure q;
    q.atoms = s.atoms;
    q.probs = s.probs;
    return q;
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<std::vector<double>> atoms) {
    DiscreteMeasure q;
    q.probs.assign(atoms.size(), 1.0 / static_cast<double>(atoms.size()));
    q.atoms = std::move(atoms);
    return q;
}

namespace {

// Pair-weighted mean square of a per-pair evaluation over Q's atoms.
template <class Fn>
double pair_mean_square(const DiscreteMeasure& q, Fn&& fn) {
    const std::size_t t = q.atoms.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < t; ++j) {
            if (i == j) continue;
            const double w = q.probs[i] * q.probs[j];
            if (w <= 0.0) continue;
            const double v = fn(static_cast<int>(i), static_cast<int>(j));
            num += v * v * w;
            den += w;
        }
    if (den <= 0.0) return 0.0;
    return num / den;
}

}  // namespace

double pair_metric(const FiniteKernelClass& cls, int member_a, int member_b,
                   const DiscreteMeasure& q) {
    return std::sqrt(pair_mean_square(q, [&](int i, int j) {
        return cls.eval(member_a, i, j, q.atoms[static_cast<std::size_t>(i)],
                        q.atoms[static_cast<std::size_t>(j)]) -
               cls.eval(member_b, i, j, q.atoms[static_cast<std::size_t>(i)],
                        q.atoms[static_cast<std::size_t>(j)]);
    }));
}

double envelope_norm(const FiniteKernelClass& cls, const DiscreteMeasure& q) {
    if (!cls.has_envelope)
        throw std::invalid_argument("envelope norm: class has no envelope");
    return std::sqrt(pair_mean_square(q, [&](int i, int j) {
        return cls.envelope.evaluate(i, j, q.atoms[static_cast<std::size_t>(i)],
                                     q.atoms[static_cast<std::size_t>(j)]);
    }));
}

namespace {

std::vector<std::vector<double>> distance_matrix(const FiniteKernelClass& cls,
                                                 const DiscreteMeasure& q) {
    const int m = static_cast<int>(cls.members.size());
    std::vector<std::vector<double>> d(static_cast<std::size_t>(m),
                                       std::vector<double>(static_cast<std::size_t>(m), 0.0));
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            d[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                d[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] =
                    pair_metric(cls, a, b, q);
    return d;
}

bool covers(const std::vector<std::vector<double>>& d, unsigned mask, double eta) {
    const int m = static_cast<int>(d.size());
    for (int a = 0; a < m; ++a) {
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < m; ++k)
            if (mask & (1u << k))
                best = std::min(best, d[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)]);
        if (!(best <= eta * (1.0 + 1e-12))) return false;
    }
    return true;
}

int covering_from_matrix(const std::vector<std::vector<double>>& d, double eta,
                         bool& exact, int& lower_bound) {
    const int m = static_cast<int>(d.size());
    // Packing lower bound: greedy set with pairwise distance > 2 eta.
    {
        std::vector<int> pack;
        for (int a = 0; a < m; ++a) {
            bool ok = true;
            for (int b : pack)
                if (d[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] <= 2.0 * eta)
                    ok = false;
            if (ok) pack.push_back(a);
        }
        lower_bound = static_cast<int>(pack.size());
    }
    if (m <= 12) {
        exact = true;
        int best = m;
        for (unsigned mask = 1; mask < (1u << m); ++mask) {
            const int pc = __builtin_popcount(mask);
            if (pc >= best) continue;
            if (covers(d, mask, eta)) best = pc;
        }
        return best;
    }
    // Greedy farthest-first from the smallest index; 2-approximation.
    exact = false;
    std::vector<int> centers{0};
    while (true) {
        double worst = -1.0;
        int far_idx = -1;
        for (int a = 0; a < m; ++a) {
            double best = std::numeric_limits<double>::infinity();
            for (int c : centers)
                best = std::min(best, d[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)]);
            if (best > worst) {
                worst = best;
                far_idx = a;
            }
        }
        if (worst <= eta * (1.0 + 1e-12)) break;
        centers.push_back(far_idx);
    }
    return static_cast<int>(centers.size());
}

}  // namespace

CoveringResult covering_number(const FiniteKernelClass& cls, const DiscreteMeasure& q,
                               double eta) {
    if (eta < 0.0) throw std::invalid_argument("covering number: eta must be >= 0");
    const auto d = distance_matrix(cls, q);
    CoveringResult res;
    res.count = covering_from_matrix(d, eta, res.exact, res.lower_bound);
    if (res.exact) res.lower_bound = res.count;
    return res;
}

EntropyProfile entropy_integral(const FiniteKernelClass& cls, double delta,
                                const std::vector<DiscreteMeasure>& q_family) {
    if (!(delta > 0.0)) throw std::invalid_argument("entropy integral: delta must be > 0");
    if (q_family.empty()) throw std::invalid_argument("entropy integral: empty Q family");
    EntropyProfile best;
    best.j2 = -1.0;
    for (const auto& q : q_family) {
        const double fn = envelope_norm(cls, q);
        EntropyProfile prof;
        if (fn <= 0.0) {
            prof.j2 = 0.0;  // all members vanish under Q
        } else {
            const auto d = distance_matrix(cls, q);
            std::vector<double> breaks{0.0, delta};
            for (std::size_t a = 0; a < d.size(); ++a)
                for (std::size_t b = a + 1; b < d.size(); ++b) {
                    const double eta = d[a][b] / fn;
                    if (eta > 0.0 && eta < delta) breaks.push_back(eta);
                }
            std::sort(breaks.begin(), breaks.end());
            breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
            double j2 = 0.0;
            for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
                const double lo = breaks[s], hi = breaks[s + 1];
                const double mid = 0.5 * (lo + hi);
                bool exact = true;
                int lower = 0;
                const int nn = covering_from_matrix(d, mid * fn, exact, lower);
                prof.eta_grid.push_back(mid);
                prof.covering.push_back(nn);
                j2 += (hi - lo) * std::log(static_cast<double>(nn));
            }
            prof.j2 = j2;
        }
        if (prof.j2 > best.j2) best = std::move(prof);
    }
    best.lower_bound_flag = true;
    return best;
}

namespace {

struct XLayout {
    // Per-index X marginal views for product-form laws.
    std::vector<const FiniteSupport*> marg;
    std::vector<std::vector<double>> grid;  // union of atoms

    static XLayout build(const std::vector<DistributionSpec>& laws) {
        XLayout lay;
        for (const auto& law : laws) {
            if (!law.is_product())
                throw std::invalid_argument("u-process terms: product-form laws required");
            lay.marg.push_back(&law.x_marginal);
        }
        for (const auto* m : lay.marg)
            for (const auto& x : m->atoms)
                if (std::find(lay.grid.begin(), lay.grid.end(), x) == lay.grid.end())
                    lay.grid.push_back(x);
        return lay;
    }
};

}  // namespace

Thm31Terms thm31_terms(const FiniteKernelClass& cls,
                       const std::vector<DistributionSpec>& laws, double c_phi,
                       double c_psi, double alpha, double beta,
                       const McConfig& mc) {
    if (cls.members.empty()) throw std::invalid_argument("u-process terms: empty class");
    for (const auto& m : cls.members)
        if (!m.is_structured())
            throw std::invalid_argument("u-process terms: structured members required");
    const int n = static_cast<int>(laws.size());
    const int nm = static_cast<int>(cls.members.size());
    const double ln = log_n(n);
    const XLayout lay = XLayout::build(laws);
    // sigma tables are shared: members differ only in their weight family.
    const ConditionalMoments cm = conditional_moments(cls.members[0], laws);
    const KernelFamily& first = cls.members[0];

    Thm31Terms out;
    out.lambda_2 = std::pow(ln, 1.0 / alpha + 1.0 / beta) * c_phi * c_psi *
                   cls.class_weight_bound;

    // Exact Sigma terms.
    double s1 = 0.0, s2 = 0.0;
    for (const auto& x : lay.grid)
        for (int m = 0; m < nm; ++m) {
            const auto& ker = cls.members[static_cast<std::size_t>(m)];
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i == j) continue;
                    const auto& mi = *lay.marg[static_cast<std::size_t>(i)];
                    for (std::size_t a = 0; a < mi.size(); ++a) {
                        const double wv = ker.w(i, j, mi.atoms[a], x);
                        const double sg = cm.sigma_phi(i, a);
                        acc += mi.probs[a] * sg * sg * wv * wv;
                    }
                }
                s1 = std::max(s1, std::sqrt(acc));
            }
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const auto& mj = *lay.marg[static_cast<std::size_t>(j)];
                    for (std::size_t b = 0; b < mj.size(); ++b) {
                        const double wv = ker.w(i, j, x, mj.atoms[b]);
                        const double sg = cm.sigma_psi(j, b);
                        acc += mj.probs[b] * sg * sg * wv * wv;
                    }
                }
                s2 = std::max(s2, std::sqrt(acc));
            }
        }
    out.sigma_n1 = c_psi * std::pow(ln, 1.0 / beta) * s1;
    out.sigma_n2 = c_phi * std::pow(ln, 1.0 / alpha) * s2;

    // Operator norm: max over members of the sigma-weighted norm.
    for (int m = 0; m < nm; ++m)
        out.op_norm = std::max(
            out.op_norm, structured_lambdas(cls.members[static_cast<std::size_t>(m)], laws,
                                            c_phi, c_psi, alpha, beta)
                             .lambda_one);

    // Monte Carlo terms.
    const int reps = std::max(mc.replications, 16);
    const std::size_t cells = lay.grid.size() * static_cast<std::size_t>(n);
    std::vector<double> e1_sum(cells, 0.0), e1_sq(cells, 0.0);
    std::vector<double> e2_sum(cells, 0.0), e2_sq(cells, 0.0);
    std::vector<double> w1(static_cast<std::size_t>(reps)), w2(static_cast<std::size_t>(reps));
    std::vector<double> u1(static_cast<std::size_t>(reps));
    const ExpectationMode thr_mode = ExpectationMode::nested_mc(2048, mc.seed ^ 0x7472756e63ULL);

    for (int r = 0; r < reps; ++r) {
        const std::uint64_t rep = static_cast<std::uint64_t>(r);
        const SampleBatch z = sample_batch(laws, mc.seed, rep, kStreamZ);
        const SampleBatch zq = sample_batch(laws, mc.seed, rep, kStreamZPrime);
        auto es = rng::Stream::derive(mc.seed, {kStreamEps, rep});
        auto esp = rng::Stream::derive(mc.seed, {kStreamEpsPrime, rep});
        std::vector<double> eps(static_cast<std::size_t>(n)), epsp(static_cast<std::size_t>(n));
        for (auto& e : eps) e = es.rademacher();
        for (auto& e : epsp) e = esp.rademacher();

        bool exact = false;
        const double t_phi =
            truncation_threshold(first.phi, laws, z, first.x_dim, thr_mode, exact);
        const double t_psi =
            truncation_threshold(first.psi, laws, zq, first.x_dim, thr_mode, exact);
        std::vector<double> cphi(static_cast<std::size_t>(n)), cpsi(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double pv = first.phi(i, z.row(i));
            cphi[static_cast<std::size_t>(i)] = std::abs(pv) <= t_phi ? pv : 0.0;
            const double qv = first.psi(i, zq.row(i));
            cpsi[static_cast<std::size_t>(i)] = std::abs(qv) <= t_psi ? qv : 0.0;
        }

        // E_{n,1} and E_{n,2} cell statistics.
        for (std::size_t g = 0; g < lay.grid.size(); ++g) {
            const auto& x = lay.grid[g];
            for (int j = 0; j < n; ++j) {
                double sup1 = 0.0, sup2 = 0.0;
                for (int m = 0; m < nm; ++m) {
                    const auto& ker = cls.members[static_cast<std::size_t>(m)];
                    double acc1 = 0.0, acc2 = 0.0;
                    for (int i = 0; i < n; ++i) {
                        if (i == j) continue;
                        acc1 += eps[static_cast<std::size_t>(i)] *
                                cphi[static_cast<std::size_t>(i)] *
                                ker.w(i, j, {z.row(i).data(), static_cast<std::size_t>(ker.x_dim)}, x);
                        acc2 += epsp[static_cast<std::size_t>(i)] *
                                cpsi[static_cast<std::size_t>(i)] *
                                ker.w(j, i, x, {zq.row(i).data(), static_cast<std::size_t>(ker.x_dim)});
                    }
                    sup1 = std::max(sup1, std::abs(acc1));
                    sup2 = std::max(sup2, std::abs(acc2));
                }
                const std::size_t cell = g * static_cast<std::size_t>(n) +
                                         static_cast<std::size_t>(j);
                e1_sum[cell] += sup1;
                e1_sq[cell] += sup1 * sup1;
                e2_sum[cell] += sup2;
                e2_sq[cell] += sup2 * sup2;
            }
        }

        // W terms: the inner sup over unit-L2 dictionaries is closed-form on
        // finite X supports.
        double w1_sup = 0.0, w2_sup = 0.0, u1_sup = 0.0;
        for (int m = 0; m < nm; ++m) {
            const auto& ker = cls.members[static_cast<std::size_t>(m)];
            double q1 = 0.0, q2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const auto& mj = *lay.marg[static_cast<std::size_t>(j)];
                for (std::size_t b = 0; b < mj.size(); ++b) {
                    double g1 = 0.0, g2 = 0.0;
                    for (int i = 0; i < n; ++i) {
                        if (i == j) continue;
                        g1 += eps[static_cast<std::size_t>(i)] *
                              cphi[static_cast<std::size_t>(i)] *
                              ker.w(i, j, {z.row(i).data(), static_cast<std::size_t>(ker.x_dim)},
                                    mj.atoms[b]);
                        g2 += epsp[static_cast<std::size_t>(i)] *
                              cpsi[static_cast<std::size_t>(i)] *
                              ker.w(j, i, mj.atoms[b],
                                    {zq.row(i).data(), static_cast<std::size_t>(ker.x_dim)});
                    }
                    g1 *= cm.sigma_psi(j, b);
                    g2 *= cm.sigma_phi(j, b);
                    q1 += mj.probs[b] * g1 * g1;
                    q2 += mj.probs[b] * g2 * g2;
                }
            }
            w1_sup = std::max(w1_sup, std::sqrt(q1));
            w2_sup = std::max(w2_sup, std::sqrt(q2));

            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    acc += eps[static_cast<std::size_t>(i)] *
                           epsp[static_cast<std::size_t>(j)] *
                           cphi[static_cast<std::size_t>(i)] *
                           ker.w(i, j, {z.row(i).data(), static_cast<std::size_t>(ker.x_dim)},
                                 {zq.row(j).data(), static_cast<std::size_t>(ker.x_dim)}) *
                           cpsi[static_cast<std::size_t>(j)];
                }
            u1_sup = std::max(u1_sup, std::abs(acc));
        }
        w1[static_cast<std::size_t>(r)] = w1_sup;
        w2[static_cast<std::size_t>(r)] = w2_sup;
        u1[static_cast<std::size_t>(r)] = u1_sup;
    }

    const auto mean_se = [reps](const std::vector<double>& xs, double& mean, double& se) {
        mean = 0.0;
        for (double v : xs) mean += v;
        mean /= reps;
        double var = 0.0;
        for (double v : xs) var += (v - mean) * (v - mean);
        var /= std::max(1, reps - 1);
        se = std::sqrt(var / reps);
    };
    mean_se(w1, out.w_n1, out.w_n1_se);
    mean_se(w2, out.w_n2, out.w_n2_se);
    mean_se(u1, out.e_u1, out.e_u1_se);

    double best1 = 0.0, best1_se = 0.0, best2 = 0.0, best2_se = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
        const double m1 = e1_sum[c] / reps;
        const double m2 = e2_sum[c] / reps;
        if (m1 > best1) {
            best1 = m1;
            const double var = std::max(0.0, e1_sq[c] / reps - m1 * m1);
            best1_se = std::sqrt(var / reps);
        }
        if (m2 > best2) {
            best2 = m2;
            const double var = std::max(0.0, e2_sq[c] / reps - m2 * m2);
            best2_se = std::sqrt(var / reps);
        }
    }
    const double f1 = c_psi * std::pow(ln, 1.0 / beta);
    const double f2 = c_phi * std::pow(ln, 1.0 / alpha);
    out.e_n1 = f1 * best1;
    out.e_n1_se = f1 * best1_se;
    out.e_n2 = f2 * best2;
    out.e_n2_se = f2 * best2_se;
    return out;
}

Thm32Terms thm32_terms(const FiniteKernelClass& cls,
                       const std::vector<DistributionSpec>& laws) {
    if (cls.members.empty()) throw std::invalid_argument("maximal terms: empty class");
    if (!cls.has_envelope) throw std::invalid_argument("maximal terms: envelope required");
    const int n = static_cast<int>(laws.size());
    const int nm = static_cast<int>(cls.members.size());
    std::vector<FiniteSupport> sup;
    sup.reserve(laws.size());
    for (const auto& law : laws) sup.push_back(law.support());
    const double npairs = static_cast<double>(n) * (n - 1);

    // Per member and pair: second moments and conditional second moments.
    // cond1[m][i][j][a] = E[f^2 | X_i = atom a], cond2 indexed by the j atom.
    std::vector<std::vector<double>> mean2(static_cast<std::size_t>(nm));
    std::vector<std::vector<std::vector<double>>> cond1(static_cast<std::size_t>(nm)),
        cond2(static_cast<std::size_t>(nm));
    double env_sum = 0.0;
    for (int m = 0; m < nm; ++m) {
        mean2[static_cast<std::size_t>(m)].assign(static_cast<std::size_t>(n) * n, 0.0);
        cond1[static_cast<std::size_t>(m)].resize(static_cast<std::size_t>(n) * n);
        cond2[static_cast<std::size_t>(m)].resize(static_cast<std::size_t>(n) * n);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto& si = sup[static_cast<std::size_t>(i)];
            const auto& sj = sup[static_cast<std::size_t>(j)];
            const std::size_t pidx = static_cast<std::size_t>(i) * n + j;
            for (int m = 0; m < nm; ++m) {
                cond1[static_cast<std::size_t>(m)][pidx].assign(si.size(), 0.0);
                cond2[static_cast<std::size_t>(m)][pidx].assign(sj.size(), 0.0);
            }
            for (std::size_t a = 0; a < si.size(); ++a)
                for (std::size_t b = 0; b < sj.size(); ++b) {
                    const double p = si.probs[a] * sj.probs[b];
                    const double fe = cls.envelope.evaluate(i, j, si.atoms[a], sj.atoms[b]);
                    env_sum += p * fe * fe;
                    for (int m = 0; m < nm; ++m) {
                        const double f = cls.eval(m, i, j, si.atoms[a], sj.atoms[b]);
                        mean2[static_cast<std::size_t>(m)][pidx] += p * f * f;
                        cond1[static_cast<std::size_t>(m)][pidx][a] += sj.probs[b] * f * f;
                        cond2[static_cast<std::size_t>(m)][pidx][b] += si.probs[a] * f * f;
                    }
                }
        }

    Thm32Terms out;
    out.env_norm = std::sqrt(env_sum / npairs);
    double sig = 0.0;
    for (int m = 0; m < nm; ++m) {
        double acc = 0.0;
        for (double v : mean2[static_cast<std::size_t>(m)]) acc += v;
        sig = std::max(sig, acc / npairs);
    }
    out.sigma_n = std::sqrt(sig);

    // Gamma terms: expectation over the X joint of the sup over members.
    double g1 = 0.0, g2 = 0.0;
    for_each_joint(sup, [&](const std::vector<std::size_t>& idx, double p) {
        double sup1 = 0.0, sup2 = 0.0;
        for (int m = 0; m < nm; ++m) {
            double acc1 = 0.0, acc2 = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const std::size_t pidx = static_cast<std::size_t>(i) * n + j;
                    acc1 += cond1[static_cast<std::size_t>(m)][pidx]
                                 [idx[static_cast<std::size_t>(i)]] -
                            mean2[static_cast<std::size_t>(m)][pidx];
                    acc2 += cond2[static_cast<std::size_t>(m)][pidx]
                                 [idx[static_cast<std::size_t>(j)]] -
                            mean2[static_cast<std::size_t>(m)][pidx];
                }
            sup1 = std::max(sup1, std::abs(acc1) / npairs);
            sup2 = std::max(sup2, std::abs(acc2) / npairs);
        }
        g1 += p * sup1;
        g2 += p * sup2;
    });
    out.gamma_n1 = std::sqrt(g1);
    out.gamma_n2 = std::sqrt(g2);

    if (out.env_norm > 0.0) {
        out.a_n = std::sqrt(g1 + g2 + sig) / out.env_norm;
        out.b_n = std::sqrt(cls.uniform_bound / (n * out.env_norm));
    }
    return out;
}

double thm32_lhs(const FiniteKernelClass& cls,
                 const std::vector<DistributionSpec>& laws) {
    const int n = static_cast<int>(laws.size());
    if (n > 20) throw std::invalid_argument("maximal lhs: n above sign enumeration cap");
    std::vector<FiniteSupport> sup;
    for (const auto& law : laws) sup.push_back(law.support());
    const std::size_t signs = std::size_t{1} << n;
    double acc = 0.0;
    for_each_joint(sup, [&](const std::vector<std::size_t>& idx, double p) {
        const SampleBatch x = batch_from_atoms(sup, idx);
        double inner = 0.0;
        for (std::size_t s = 0; s < signs; ++s) {
            double best = 0.0;
            for (int m = 0; m < static_cast<int>(cls.members.size()); ++m) {
                double v = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        if (i == j) continue;
                        const double ei = (s >> i) & 1 ? 1.0 : -1.0;
                        const double ej = (s >> j) & 1 ? 1.0 : -1.0;
                        v += ei * ej * cls.eval(m, i, j, x.row(i), x.row(j));
                    }
                best = std::max(best, std::abs(v));
            }
            inner += best;
        }
        acc += p * inner / static_cast<double>(signs);
    });
    return acc / std::sqrt(static_cast<double>(n) * (n - 1));
}

}  // namespace ustat
