#include "ustat/hoeffding.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace ustat {

AtomCache AtomCache::build(const std::vector<DistributionSpec>& laws,
                           const ExpectationMode& mode) {
    AtomCache c;
    const int n = static_cast<int>(laws.size());
    c.atoms.resize(laws.size());
    c.probs.resize(laws.size());
    if (mode.kind == ExpectationMode::Kind::ExactFinite) {
        for (int i = 0; i < n; ++i) {
            if (!laws[static_cast<std::size_t>(i)].has_finite_support())
                throw std::invalid_argument(
                    "exact expectation mode requires finite-support laws");
            FiniteSupport s = laws[static_cast<std::size_t>(i)].support();
            SampleBatch b;
            b.n = static_cast<int>(s.size());
            b.d = s.dim();
            for (const auto& a : s.atoms)
                b.values.insert(b.values.end(), a.begin(), a.end());
            c.atoms[static_cast<std::size_t>(i)] = std::move(b);
            c.probs[static_cast<std::size_t>(i)] = std::move(s.probs);
        }
        c.exact = true;
        return c;
    }
    if (mode.samples < 2)
        throw std::invalid_argument("nested mc needs at least 2 samples");
    for (int i = 0; i < n; ++i) {
        const auto& law = laws[static_cast<std::size_t>(i)];
        SampleBatch b;
        b.n = mode.samples;
        b.d = law.dimension;
        b.values.resize(static_cast<std::size_t>(mode.samples) * law.dimension);
        auto rs = rng::Stream::derive(mode.seed, {0x6e6d63ULL, static_cast<std::uint64_t>(i)});
        for (int a = 0; a < mode.samples; ++a) law.sample(rs, b.row(a));
        c.atoms[static_cast<std::size_t>(i)] = std::move(b);
        c.probs[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(mode.samples),
                                                    1.0 / mode.samples);
    }
    c.exact = false;
    return c;
}

double cond_mean_given_first(const KernelFamily& kernel, const AtomCache& cache,
                             int i, int j, std::span<const double> zi) {
    double acc = 0.0;
    for (std::size_t b = 0; b < cache.size(j); ++b)
        acc += cache.prob(j, b) * kernel.evaluate(i, j, zi, cache.atom(j, b));
    return acc;
}

double cond_mean_given_second(const KernelFamily& kernel, const AtomCache& cache,
                              int i, int j, std::span<const double> zj) {
    double acc = 0.0;
    for (std::size_t a = 0; a < cache.size(i); ++a)
        acc += cache.prob(i, a) * kernel.evaluate(i, j, cache.atom(i, a), zj);
    return acc;
}

double pair_mean(const KernelFamily& kernel, const AtomCache& cache, int i, int j) {
    double acc = 0.0;
    for (std::size_t a = 0; a < cache.size(i); ++a)
        acc += cache.prob(i, a) *
               cond_mean_given_first(kernel, cache, i, j, cache.atom(i, a));
    return acc;
}

namespace {

struct ProjectionState {
    KernelFamily kernel;
    AtomCache cache;
    std::vector<double> means;  // row-major n x n pair means, diagonal unused
    int n = 0;

    double mean(int i, int j) const {
        return means[static_cast<std::size_t>(i) * n + j];
    }
};

}  // namespace

HoeffdingSplit hoeffding_project(const KernelFamily& kernel,
                                 const std::vector<DistributionSpec>& laws,
                                 const ExpectationMode& mode) {
    auto st = std::make_shared<ProjectionState>();
    st->kernel = kernel;
    st->cache = AtomCache::build(laws, mode);
    st->n = static_cast<int>(laws.size());
    st->means.assign(static_cast<std::size_t>(st->n) * st->n, 0.0);
    double grand = 0.0;
    for (int i = 0; i < st->n; ++i)
        for (int j = 0; j < st->n; ++j) {
            if (i == j) continue;
            const double m = pair_mean(st->kernel, st->cache, i, j);
            st->means[static_cast<std::size_t>(i) * st->n + j] = m;
            grand += m;
        }

    HoeffdingSplit split;
    split.grand_mean = grand;
    split.exact = st->cache.exact;
    split.mode_note = st->cache.exact
                          ? "exact-finite"
                          : "nested-mc(" + std::to_string(mode.samples) + ")";
    split.degenerate = KernelFamily::generic(
        [st](int i, int j, std::span<const double> zi, std::span<const double> zj) {
            return st->kernel.evaluate(i, j, zi, zj) -
                   cond_mean_given_second(st->kernel, st->cache, i, j, zj) -
                   cond_mean_given_first(st->kernel, st->cache, i, j, zi) +
                   st->mean(i, j);
        },
        kernel.symmetric, KernelFamily::Degeneracy::Projected);
    split.g = [st](int j, std::span<const double> z) {
        double acc = 0.0;
        for (int i = 0; i < st->n; ++i) {
            if (i == j) continue;
            acc += cond_mean_given_second(st->kernel, st->cache, i, j, z) - st->mean(i, j);
        }
        return acc;
    };
    split.h = [st](int i, std::span<const double> z) {
        double acc = 0.0;
        for (int j = 0; j < st->n; ++j) {
            if (j == i) continue;
            acc += cond_mean_given_first(st->kernel, st->cache, i, j, z) - st->mean(i, j);
        }
        return acc;
    };
    return split;
}

double HoeffdingSplit::reconstruct(const SampleBatch& batch, bool parallel) const {
    UStatOptions opts;
    opts.parallel = parallel;
    double total = evaluate_ustat(degenerate, batch, nullptr, opts) + grand_mean;
    for (int j = 0; j < batch.n; ++j) total += g(j, batch.row(j));
    for (int i = 0; i < batch.n; ++i) total += h(i, batch.row(i));
    return total;
}

DegeneracyReport degeneracy_check(const KernelFamily& kernel,
                                  const std::vector<DistributionSpec>& laws,
                                  const ExpectationMode& mode) {
    const AtomCache cache = AtomCache::build(laws, mode);
    const int n = cache.n();
    DegeneracyReport rep;
    rep.exact = cache.exact;
    if (cache.exact) {
        double scale = 1.0;
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                for (std::size_t a = 0; a < cache.size(i); ++a)
                    for (std::size_t b = 0; b < cache.size(j); ++b)
                        scale = std::max(scale,
                                         std::abs(kernel.evaluate(i, j, cache.atom(i, a),
                                                                  cache.atom(j, b))));
                for (std::size_t a = 0; a < cache.size(i); ++a)
                    worst = std::max(worst,
                                     std::abs(cond_mean_given_first(kernel, cache, i, j,
                                                                    cache.atom(i, a))));
                for (std::size_t b = 0; b < cache.size(j); ++b)
                    worst = std::max(worst,
                                     std::abs(cond_mean_given_second(kernel, cache, i, j,
                                                                     cache.atom(j, b))));
            }
        rep.max_abs_conditional_mean = worst;
        rep.threshold = 1e-12 * scale;
        rep.pass = worst <= rep.threshold;
        return rep;
    }
    // MC mode: estimated conditional means must sit within 4 standard errors
    // of zero at every probed conditioning point.
    const std::size_t probes = 16;
    bool pass = true;
    double worst_standardized = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto check_at = [&](bool first, std::span<const double> z) {
                double s1 = 0.0, s2 = 0.0;
                const int src = first ? j : i;
                const std::size_t m = cache.size(src);
                for (std::size_t a = 0; a < m; ++a) {
                    const double v = first
                                         ? kernel.evaluate(i, j, z, cache.atom(src, a))
                                         : kernel.evaluate(i, j, cache.atom(src, a), z);
                    s1 += v;
                    s2 += v * v;
                }
                const double mean = s1 / static_cast<double>(m);
                const double var =
                    std::max(0.0, s2 / static_cast<double>(m) - mean * mean);
                const double se = std::sqrt(var / static_cast<double>(m)) + 1e-300;
                const double z_score = std::abs(mean) / se;
                worst_standardized = std::max(worst_standardized, z_score);
                if (z_score > 4.0 && std::abs(mean) > 1e-12) pass = false;
            };
            for (std::size_t a = 0; a < std::min(probes, cache.size(i)); ++a)
                check_at(true, cache.atom(i, a));
            for (std::size_t b = 0; b < std::min(probes, cache.size(j)); ++b)
                check_at(false, cache.atom(j, b));
        }
    rep.max_abs_conditional_mean = worst_standardized;  // standardized in MC mode
    rep.threshold = 4.0;
    rep.pass = pass;
    return rep;
}

}  // namespace ustat
