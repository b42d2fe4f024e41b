#include "ustat/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ustat/reduce.hpp"

namespace ustat {

ChaosSpec ChaosSpec::from_matrix(std::vector<double> a, int n) {
    if (static_cast<int>(a.size()) != n * n)
        throw std::invalid_argument("chaos: matrix size mismatch");
    for (int i = 0; i < n; ++i)
        if (a[static_cast<std::size_t>(i) * n + i] != 0.0)
            throw std::invalid_argument("chaos: diagonal must be zero");
    ChaosSpec s;
    s.a = std::move(a);
    s.n = n;
    return s;
}

double ChaosSpec::s_n() const {
    double q = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) q += coeff(i, j) * coeff(i, j);
    return std::sqrt(q);
}

ResampledStatistic decouple_symmetrize(const KernelFamily& kernel,
                                       const std::vector<DistributionSpec>& laws,
                                       std::uint64_t seed) {
    ResampledStatistic st;
    st.kernel = kernel;
    st.laws = laws;
    st.transform = Transform::SymmetrizedDecoupled;
    st.seed = seed;
    return st;
}

double ResampledStatistic::evaluate(std::uint64_t replication, bool parallel) const {
    const int n = static_cast<int>(laws.size());
    const SampleBatch z = sample_batch(laws, seed, replication, kStreamZ);
    if (transform == Transform::Decoupled) {
        const SampleBatch zp = sample_batch(laws, seed, replication, kStreamZPrime);
        UStatOptions opts;
        opts.parallel = parallel;
        return evaluate_ustat(kernel, z, &zp, opts);
    }
    auto es = rng::Stream::derive(seed, {kStreamEps, replication});
    std::vector<double> eps(static_cast<std::size_t>(n));
    for (auto& e : eps) e = es.rademacher();
    if (transform == Transform::Chaos) {
        // Chaos uses one sign vector on both slots and the kernel's values at
        // z; with a matrix kernel and unit samples this is sum eps_i eps_j a_ij.
        return evaluate_ustat_signed(kernel, z, z, eps, eps, parallel);
    }
    const SampleBatch zp = sample_batch(laws, seed, replication, kStreamZPrime);
    auto esp = rng::Stream::derive(seed, {kStreamEpsPrime, replication});
    std::vector<double> epsp(static_cast<std::size_t>(n));
    for (auto& e : epsp) e = esp.rademacher();
    return evaluate_ustat_signed(kernel, z, zp, eps, epsp, parallel);
}

namespace {

std::vector<FiniteSupport> supports_of(const std::vector<DistributionSpec>& laws) {
    std::vector<FiniteSupport> sup;
    sup.reserve(laws.size());
    for (const auto& law : laws) sup.push_back(law.support());
    return sup;
}

FiniteSupport sign_support() {
    FiniteSupport s;
    s.atoms = {{-1.0}, {1.0}};
    s.probs = {0.5, 0.5};
    return s;
}

}  // namespace

ScalarLaw enumerate_ustat_law(const KernelFamily& kernel,
                              const std::vector<DistributionSpec>& laws) {
    const auto sup = supports_of(laws);
    const int n = static_cast<int>(laws.size());
    std::vector<double> values, probs;
    for_each_joint(sup, [&](const std::vector<std::size_t>& idx, double p) {
        const SampleBatch b = batch_from_atoms(sup, idx);
        double v = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) v += kernel.evaluate(i, j, b.row(i), b.row(j));
        values.push_back(v);
        probs.push_back(p);
    });
    return ScalarLaw::finite(std::move(values), std::move(probs));
}

ScalarLaw enumerate_statistic_law(const KernelFamily& kernel,
                                  const std::vector<DistributionSpec>& laws,
                                  Transform transform) {
    const int n = static_cast<int>(laws.size());
    std::vector<FiniteSupport> sup = supports_of(laws);
    if (transform == Transform::Chaos) {
        for (int i = 0; i < n; ++i) sup.push_back(sign_support());
    } else {
        const auto zsup = sup;
        sup.insert(sup.end(), zsup.begin(), zsup.end());  // Z'
        if (transform == Transform::SymmetrizedDecoupled)
            for (int i = 0; i < 2 * n; ++i) sup.push_back(sign_support());
    }
    const auto zonly = supports_of(laws);
    std::vector<double> values, probs;
    for_each_joint(sup, [&](const std::vector<std::size_t>& idx, double p) {
        double v = 0.0;
        if (transform == Transform::Chaos) {
            const SampleBatch z = batch_from_atoms(
                zonly, {idx.begin(), idx.begin() + n});
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const double ei = idx[static_cast<std::size_t>(n + i)] ? 1.0 : -1.0;
                    const double ej = idx[static_cast<std::size_t>(n + j)] ? 1.0 : -1.0;
                    v += ei * ej * kernel.evaluate(i, j, z.row(i), z.row(j));
                }
        } else {
            const SampleBatch z = batch_from_atoms(zonly, {idx.begin(), idx.begin() + n});
            const SampleBatch zp =
                batch_from_atoms(zonly, {idx.begin() + n, idx.begin() + 2 * n});
            const bool signs = transform == Transform::SymmetrizedDecoupled;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    double term = kernel.evaluate(i, j, z.row(i), zp.row(j));
                    if (signs) {
                        term *= (idx[static_cast<std::size_t>(2 * n + i)] ? 1.0 : -1.0) *
                                (idx[static_cast<std::size_t>(3 * n + j)] ? 1.0 : -1.0);
                    }
                    v += term;
                }
        }
        values.push_back(v);
        probs.push_back(p);
    });
    return ScalarLaw::finite(std::move(values), std::move(probs));
}

namespace {

double p_norm(const ScalarLaw& law, double p) {
    double acc = 0.0;
    for (std::size_t k = 0; k < law.values.size(); ++k)
        acc += law.probs[k] * std::pow(std::abs(law.values[k]), p);
    return std::pow(acc, 1.0 / p);
}

}  // namespace

DecouplingReport decoupling_moment_check(const KernelFamily& kernel,
                                         const std::vector<DistributionSpec>& laws,
                                         const std::vector<double>& p_list) {
    const HoeffdingSplit split = hoeffding_project(kernel, laws, ExpectationMode::exact());
    const ScalarLaw lhs_law = enumerate_ustat_law(split.degenerate, laws);
    const ScalarLaw rhs_law =
        enumerate_statistic_law(split.degenerate, laws, Transform::SymmetrizedDecoupled);
    DecouplingReport rep;
    rep.pass = true;
    for (double p : p_list) {
        const double lhs = p_norm(lhs_law, p);
        const double rhs = p_norm(rhs_law, p);
        const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? 1e18 : 0.0);
        rep.p_values.push_back(p);
        rep.lhs_norms.push_back(lhs);
        rep.rhs_norms.push_back(rhs);
        rep.ratios.push_back(ratio);
        if (ratio > 192.0) rep.pass = false;
    }
    return rep;
}

ChaosReport chaos_psi1_check(const ChaosSpec& spec) {
    if (spec.n > 20) throw std::invalid_argument("chaos check: n above enumeration cap");
    const std::size_t states = std::size_t{1} << spec.n;
    std::vector<double> values(states), probs(states, 1.0 / static_cast<double>(states));
    for (std::size_t s = 0; s < states; ++s) {
        double v = 0.0;
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.n; ++j) {
                if (i == j) continue;
                const double ei = (s >> i) & 1 ? 1.0 : -1.0;
                const double ej = (s >> j) & 1 ? 1.0 : -1.0;
                v += ei * ej * spec.coeff(i, j);
            }
        values[s] = v;
    }
    ChaosReport rep;
    rep.psi1 = psi_norm(ScalarLaw::finite(std::move(values), std::move(probs)), 1.0).value;
    rep.bound = 4.0 * std::exp(1.0) * spec.s_n();
    rep.pass = rep.psi1 <= rep.bound * (1.0 + 1e-9);
    return rep;
}

namespace {

// E[max_i |fn(z_i with Y_i resampled)|] conditional on the X parts of the
// given batch rows; exact when the conditional supports enumerate.
double conditional_max_mean(const KernelFamily::PointFn& fn,
                            const std::vector<DistributionSpec>& laws,
                            const SampleBatch& batch, int x_dim,
                            const ExpectationMode& mode, bool& exact);

}  // namespace

double truncation_threshold(const KernelFamily::PointFn& fn,
                            const std::vector<DistributionSpec>& laws,
                            const SampleBatch& batch, int x_dim,
                            const ExpectationMode& mode, bool& exact) {
    return 8.0 * conditional_max_mean(fn, laws, batch, x_dim, mode, exact);
}

namespace {

double conditional_max_mean(const KernelFamily::PointFn& fn,
                            const std::vector<DistributionSpec>& laws,
                            const SampleBatch& batch, int x_dim,
                            const ExpectationMode& mode, bool& exact) {
    const int n = batch.n;
    std::vector<const ConditionalLaw*> cond(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> xs(static_cast<std::size_t>(n));
    bool all_finite = true;
    std::size_t states = 1;
    for (int i = 0; i < n; ++i) {
        const auto& law = laws[static_cast<std::size_t>(i)];
        if (!law.is_product())
            throw std::invalid_argument("truncation: product-form laws required");
        const auto row = batch.row(i);
        xs[static_cast<std::size_t>(i)].assign(row.begin(), row.begin() + x_dim);
        // locate the x atom of this row
        std::size_t found = law.x_marginal.size();
        for (std::size_t a = 0; a < law.x_marginal.size(); ++a)
            if (std::equal(law.x_marginal.atoms[a].begin(), law.x_marginal.atoms[a].end(),
                           xs[static_cast<std::size_t>(i)].begin()))
                found = a;
        if (found == law.x_marginal.size())
            throw std::invalid_argument("truncation: sample x not on the law's support");
        cond[static_cast<std::size_t>(i)] = &law.y_given_x[found];
        if (cond[static_cast<std::size_t>(i)]->is_finite()) {
            const std::size_t sz = cond[static_cast<std::size_t>(i)]->atoms.size();
            if (states > kEnumerationCap / sz)
                all_finite = false;
            else
                states *= sz;
        } else {
            all_finite = false;
        }
    }
    std::vector<double> z;
    const auto eval_at = [&](int i, double y) {
        z.assign(xs[static_cast<std::size_t>(i)].begin(), xs[static_cast<std::size_t>(i)].end());
        z.push_back(y);
        return std::abs(fn(i, z));
    };
    if (all_finite) {
        exact = true;
        std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
        double acc = 0.0;
        while (true) {
            double p = 1.0, mx = 0.0;
            for (int i = 0; i < n; ++i) {
                const auto& cl = *cond[static_cast<std::size_t>(i)];
                p *= cl.probs[idx[static_cast<std::size_t>(i)]];
                mx = std::max(mx, eval_at(i, cl.atoms[idx[static_cast<std::size_t>(i)]]));
            }
            acc += p * mx;
            int i = 0;
            for (; i < n; ++i) {
                if (++idx[static_cast<std::size_t>(i)] <
                    cond[static_cast<std::size_t>(i)]->atoms.size())
                    break;
                idx[static_cast<std::size_t>(i)] = 0;
            }
            if (i == n) break;
        }
        return acc;
    }
    exact = false;
    const int m = std::max(mode.samples, 256);
    auto rs = rng::Stream::derive(mode.seed, {0x746d61785fULL});
    double acc = 0.0;
    for (int r = 0; r < m; ++r) {
        double mx = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto& cl = *cond[static_cast<std::size_t>(i)];
            const double y = cl.is_finite() ? cl.atoms[rs.categorical(cl.probs)]
                                            : cl.mean + cl.sd * rs.normal();
            mx = std::max(mx, eval_at(i, y));
        }
        acc += mx;
    }
    return acc / m;
}

}  // namespace

TruncationSplit truncation_split(const KernelFamily& structured,
                                 const std::vector<DistributionSpec>& laws,
                                 const SampleBatch& z, const SampleBatch& zp,
                                 std::span<const double> eps,
                                 std::span<const double> eps_prime,
                                 const ExpectationMode& mode) {
    if (!structured.is_structured())
        throw std::invalid_argument("truncation: structured kernel required");
    TruncationSplit out;
    bool exact_phi = false, exact_psi = false;
    out.t_phi = truncation_threshold(structured.phi, laws, z, structured.x_dim,
                                     mode, exact_phi);
    out.t_psi = truncation_threshold(structured.psi, laws, zp, structured.x_dim,
                                     mode, exact_psi);
    out.thresholds_exact = exact_phi && exact_psi;
    if (!std::isfinite(out.t_phi) || !std::isfinite(out.t_psi))
        throw std::runtime_error("truncation: non-finite threshold");

    const int n = z.n;
    const reduce::PairIndexer pairs{static_cast<std::size_t>(n)};
    out.term1_bound = out.t_phi * structured.bw_bound * out.t_psi;
    for (std::size_t k = 0; k < pairs.count(); ++k) {
        const auto [i, j] = pairs(k);
        const auto zi = z.row(static_cast<int>(i));
        const auto zj = zp.row(static_cast<int>(j));
        const double pv = structured.phi(static_cast<int>(i), zi);
        const double qv = structured.psi(static_cast<int>(j), zj);
        const double wv = structured.w(
            static_cast<int>(i), static_cast<int>(j),
            zi.first(static_cast<std::size_t>(structured.x_dim)),
            zj.first(static_cast<std::size_t>(structured.x_dim)));
        const double term = eps[i] * eps_prime[j] * pv * wv * qv;
        const bool small_p = std::abs(pv) <= out.t_phi;
        const bool small_q = std::abs(qv) <= out.t_psi;
        if (small_p && small_q) {
            out.u1 += term;
            out.max_term1_summand = std::max(out.max_term1_summand, std::abs(pv * wv * qv));
        } else if (small_p) {
            out.u2 += term;
        } else if (small_q) {
            out.u3 += term;
        } else {
            out.u4 += term;
        }
    }
    out.total = out.u1 + out.u2 + out.u3 + out.u4;
    out.bound_ok = out.max_term1_summand <= out.term1_bound * (1.0 + 1e-12);
    return out;
}

}  // namespace ustat
