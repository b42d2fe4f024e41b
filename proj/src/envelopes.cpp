#include "ustat/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ustat/stats.hpp"

namespace ustat {

namespace {

void finish(TermBreakdown& b) {
    b.value = 0.0;
    b.regime = 0;
    for (std::size_t k = 0; k < b.terms.size(); ++k) {
        b.value += b.terms[k];
        if (b.terms[k] > b.terms[static_cast<std::size_t>(b.regime)])
            b.regime = static_cast<int>(k);
    }
}

}  // namespace

TermBreakdown moment_envelope_bound(const LambdaProfile& prof, double p,
                                    const EnvelopeConstants& constants,
                                    bool literal_reading) {
    if (p < 1.0) throw std::invalid_argument("moment envelope: p must be >= 1");
    const double ln = log_n(prof.n);
    const double as = prof.alpha_star, bs = prof.beta_star;
    const double alpha_weighted = literal_reading ? prof.lambda_beta : prof.lambda_alpha;
    TermBreakdown b;
    b.labels = {"sqrt-p", "p", "beta-log", "alpha-log", "cross"};
    b.terms = {
        constants.c * std::sqrt(p) * prof.lambda_half,
        constants.c * p * prof.lambda_one,
        constants.c_beta * std::pow(p, 0.5 + 1.0 / bs) * std::pow(ln, 1.0 / prof.beta) *
            prof.lambda_beta,
        constants.c_alpha * std::pow(p, 0.5 + 1.0 / as) *
            std::pow(ln, 0.5 + 1.0 / prof.alpha) * alpha_weighted,
        constants.c_alpha_beta * std::pow(p, 1.0 / as + 1.0 / bs) * prof.k_f * prof.k_g *
            std::pow(ln, 1.0 / prof.alpha + 1.0 / prof.beta + 1.0 / bs),
    };
    finish(b);
    return b;
}

TermBreakdown TailEnvelope::evaluate(double t) const {
    if (t < 0.0) throw std::invalid_argument("tail envelope: t must be >= 0");
    const double as = profile.alpha_star, bs = profile.beta_star;
    const double e_beta_32 = strict_exponent ? 0.5 + bs : 0.5 + 1.0 / bs;
    TermBreakdown b;
    b.labels = {"sqrt-t",  "t",          "alpha-star", "beta-star",
                "alpha-32", "beta-32",   "cross"};
    const double k = constants.k_tail;
    b.terms = {
        k * std::sqrt(t) * profile.lambda_half,
        k * t * profile.lambda_one,
        k * std::pow(t, 1.0 / as) * profile.lambda_alpha_star,
        k * std::pow(t, 1.0 / bs) * profile.lambda_beta_star,
        k * std::pow(t, 0.5 + 1.0 / as) * profile.lambda_32_alpha,
        k * std::pow(t, e_beta_32) * profile.lambda_32_beta,
        k * std::pow(t, 1.0 / as + 1.0 / bs) * profile.lambda_2,
    };
    finish(b);
    return b;
}

double fit_tail_constant(const TailEnvelope& envelope,
                         std::span<const double> sorted_abs,
                         std::span<const double> t_grid, double rel_tol) {
    if (sorted_abs.size() < 1000)
        throw std::invalid_argument("tail fit: need at least 1000 replications");
    if (t_grid.empty()) throw std::invalid_argument("tail fit: empty t grid");
    TailEnvelope base = envelope;
    base.constants.k_tail = 1.0;
    const auto n = static_cast<std::int64_t>(sorted_abs.size());
    std::vector<double> shapes;
    shapes.reserve(t_grid.size());
    for (double t : t_grid) {
        if (!(t > 0.0)) throw std::invalid_argument("tail fit: t grid must be positive");
        shapes.push_back(base.evaluate(t).value);
    }
    const auto valid = [&](double kp) {
        for (std::size_t g = 0; g < shapes.size(); ++g) {
            const double thr = kp * shapes[g];
            if (shapes[g] <= 0.0) {
                // zero envelope value: only a point mass at zero can comply
                if (sorted_abs.back() > 0.0) return false;
                continue;
            }
            const auto it =
                std::lower_bound(sorted_abs.begin(), sorted_abs.end(), thr);
            const auto count = static_cast<std::int64_t>(sorted_abs.end() - it);
            const double upper = binomial_upper_bound(count, n, 0.99);
            if (upper > 2.0 * std::exp(-t_grid[g]) + 1e-15) return false;
        }
        return true;
    };
    double lo = std::pow(2.0, -40);
    if (valid(lo)) return lo;  // degenerate data: any scale works
    double hi = 1.0;
    while (!valid(hi)) {
        hi *= 2.0;
        if (hi > 1e18)
            throw std::runtime_error("tail fit: no finite constant satisfies the bound");
    }
    if (hi > 1.0) lo = 0.5 * hi;
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (valid(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

MaximalBound maximal_bound(const FiniteKernelClass& cls,
                           const std::vector<DistributionSpec>& laws, double a,
                           double b, const std::vector<DiscreteMeasure>& q_family,
                           const EnvelopeConstants& constants) {
    MaximalBound out;
    out.terms = thm32_terms(cls, laws);
    if (a < out.terms.a_n * (1.0 - 1e-12))
        throw std::invalid_argument("maximal bound: a below its admissible threshold");
    if (b < out.terms.b_n * (1.0 - 1e-12))
        throw std::invalid_argument("maximal bound: b below its admissible threshold");
    const EntropyProfile prof = entropy_integral(cls, a, q_family);
    out.j2_at_a = prof.j2;
    out.j2_lower_bound_flag = prof.lower_bound_flag;
    const double j2 = prof.j2;
    out.bound = constants.c_maximal * out.terms.env_norm * j2 *
                (1.0 + j2 * b * b / (a * a));
    return out;
}

TermBreakdown uprocess_envelope(const Thm31Terms& terms, double p, double alpha,
                                double beta, int n,
                                const EnvelopeConstants& constants) {
    if (p < 1.0) throw std::invalid_argument("u-process envelope: p must be >= 1");
    const double ln = log_n(n);
    const double as = std::min(alpha, 1.0), bs = std::min(beta, 1.0);
    const double k = constants.k_uproc;
    TermBreakdown b;
    b.labels = {"mean",       "sqrt-p",     "p",          "alpha-star",
                "beta-star",  "alpha-32",   "beta-32",    "cross"};
    b.terms = {
        k * terms.e_u1,
        k * std::sqrt(p) * (terms.w_n1 + terms.w_n2),
        k * p * terms.op_norm,
        k * std::pow(p, 1.0 / as) *
            (terms.e_n2 + terms.sigma_n2 * std::sqrt(ln) + terms.lambda_2 * ln),
        k * std::pow(p, 1.0 / bs) *
            (terms.e_n1 + terms.sigma_n1 * std::sqrt(ln) + terms.lambda_2 * ln),
        k * std::pow(p, 0.5 + 1.0 / as) * terms.sigma_n2,
        k * std::pow(p, 0.5 + 1.0 / bs) * terms.sigma_n1,
        k * std::pow(p, 1.0 / as + 1.0 / bs) * terms.lambda_2,
    };
    finish(b);
    return b;
}

namespace {

struct ScalarJoint {
    std::vector<FiniteSupport> sup;
    int n = 0;

    static ScalarJoint build(const std::vector<DistributionSpec>& laws, int max_n) {
        ScalarJoint j;
        j.n = static_cast<int>(laws.size());
        if (j.n < 1 || j.n > max_n)
            throw std::invalid_argument("moment lemma: index count out of range");
        for (const auto& law : laws) {
            FiniteSupport s = law.support();
            if (s.dim() != 1)
                throw std::invalid_argument("moment lemma: scalar laws required");
            j.sup.push_back(std::move(s));
        }
        return j;
    }
    double atom(int i, std::size_t a) const {
        return sup[static_cast<std::size_t>(i)].atoms[a][0];
    }
};

}  // namespace

LemmaReport sum_moment_lemma(const std::vector<DistributionSpec>& laws, double p) {
    if (p < 1.0) throw std::invalid_argument("moment lemma: p must be >= 1");
    const ScalarJoint j = ScalarJoint::build(laws, 6);
    double var_sum = 0.0;
    for (int i = 0; i < j.n; ++i) {
        double mean = 0.0, m2 = 0.0, scale = 1.0;
        for (std::size_t a = 0; a < j.sup[static_cast<std::size_t>(i)].size(); ++a) {
            const double v = j.atom(i, a);
            const double pr = j.sup[static_cast<std::size_t>(i)].probs[a];
            mean += pr * v;
            m2 += pr * v * v;
            scale = std::max(scale, std::abs(v));
        }
        if (std::abs(mean) > 1e-12 * scale)
            throw std::invalid_argument("sum moment lemma: laws must be mean zero");
        var_sum += m2;
    }
    double lhs = 0.0, emax = 0.0;
    for_each_joint(j.sup, [&](const std::vector<std::size_t>& idx, double pr) {
        double s = 0.0, mx = 0.0;
        for (int i = 0; i < j.n; ++i) {
            const double v = j.atom(i, idx[static_cast<std::size_t>(i)]);
            s += v;
            mx = std::max(mx, std::abs(v));
        }
        lhs += pr * std::pow(std::abs(s), p);
        emax += pr * std::pow(mx, p);
    });
    LemmaReport rep;
    rep.lhs = lhs;
    rep.rhs = std::pow(4.0, p) * std::pow(p, 0.5 * p) * std::pow(var_sum, 0.5 * p) +
              std::pow(4.0, p) * std::pow(p, p) * emax;
    rep.pass = rep.lhs <= rep.rhs * (1.0 + 1e-12);
    return rep;
}

LemmaReport max_moment_lemma(const std::vector<DistributionSpec>& laws, double p,
                             double alpha) {
    if (p < 1.0) throw std::invalid_argument("moment lemma: p must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("moment lemma: alpha must be > 0");
    const ScalarJoint j = ScalarJoint::build(laws, 6);
    double sum_p = 0.0, sum_1 = 0.0;
    for (int i = 0; i < j.n; ++i)
        for (std::size_t a = 0; a < j.sup[static_cast<std::size_t>(i)].size(); ++a) {
            const double v = std::abs(j.atom(i, a));
            const double pr = j.sup[static_cast<std::size_t>(i)].probs[a];
            sum_p += pr * std::pow(v, p);
            sum_1 += pr * v;
        }
    double emax = 0.0;
    for_each_joint(j.sup, [&](const std::vector<std::size_t>& idx, double pr) {
        double mx = 0.0;
        for (int i = 0; i < j.n; ++i)
            mx = std::max(mx, std::abs(j.atom(i, idx[static_cast<std::size_t>(i)])));
        emax += pr * std::pow(mx, p);
    });
    const double pa = std::pow(p, p * alpha);
    const double ca = std::pow(1.5, p * alpha);
    LemmaReport rep;
    rep.lhs = pa * sum_p;
    rep.rhs = 4.0 * ca * pa * emax + 2.0 * ca * std::pow(sum_1, p);
    rep.pass = rep.lhs <= rep.rhs * (1.0 + 1e-12);
    return rep;
}

}  // namespace ustat
