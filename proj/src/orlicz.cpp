#include "ustat/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace ustat {

namespace {

constexpr double kExpClamp = 700.0;  // exp overflows just above this

template <class F>
double simpson(F&& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(F&& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

double log_sum_exp(const std::vector<double>& xs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : xs) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - mx);
    return mx + std::log(s);
}

}  // namespace

ScalarLaw ScalarLaw::finite(std::vector<double> values, std::vector<double> probs) {
    if (values.size() != probs.size() || values.empty())
        throw std::invalid_argument("scalar law: bad atoms");
    ScalarLaw s;
    s.kind = Kind::Finite;
    s.values = std::move(values);
    s.probs = std::move(probs);
    return s;
}

ScalarLaw ScalarLaw::gaussian(double mean, double sd,
                              std::function<double(double)> transform) {
    if (!(sd > 0.0)) throw std::invalid_argument("scalar law: sd must be > 0");
    ScalarLaw s;
    s.kind = Kind::GaussianTransformed;
    s.mean = mean;
    s.sd = sd;
    s.transform = std::move(transform);
    return s;
}

double ScalarLaw::max_abs() const {
    if (kind != Kind::Finite) throw std::logic_error("max_abs: finite law required");
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double psi_moment(const ScalarLaw& law, double alpha, double c) {
    if (!(alpha > 0.0)) throw std::invalid_argument("psi moment: alpha must be > 0");
    if (!(c > 0.0)) throw std::invalid_argument("psi moment: scale must be > 0");
    if (law.kind == ScalarLaw::Kind::Finite) {
        std::vector<double> terms;
        terms.reserve(law.values.size());
        for (std::size_t k = 0; k < law.values.size(); ++k) {
            if (law.probs[k] <= 0.0) continue;
            terms.push_back(std::log(law.probs[k]) +
                            std::pow(std::abs(law.values[k]) / c, alpha));
        }
        const double lse = log_sum_exp(terms);
        if (lse > kExpClamp) return std::numeric_limits<double>::infinity();
        return std::exp(lse);
    }
    // Transformed Gaussian: quadrature over 12 standard deviations.
    const auto& tr = law.transform;
    const auto integrand = [&](double z) {
        const double y = law.mean + law.sd * z;
        const double v = tr ? tr(y) : y;
        const double e = std::pow(std::abs(v) / c, alpha);
        const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
        if (e > kExpClamp) return std::numeric_limits<double>::infinity();
        return pdf * std::exp(e);
    };
    const double val = integrate(integrand, -12.0, 12.0, 1e-11);
    return std::isfinite(val) ? val : std::numeric_limits<double>::infinity();
}

namespace {

PsiNormEstimate norm_by_bisection(const ScalarLaw& law, double alpha, double tol,
                                  PsiNormEstimate::Mode mode) {
    if (!(alpha > 0.0)) throw std::invalid_argument("psi norm: alpha must be > 0");
    PsiNormEstimate est;
    est.alpha = alpha;
    est.mode = mode;
    est.tolerance = tol;

    const auto moment = [&](double c) { return psi_moment(law, alpha, c); };

    double hi = 1.0;
    int guard = 0;
    while (moment(hi) > 2.0) {
        hi *= 2.0;
        if (++guard > 4000) throw std::runtime_error("psi norm: no finite scale found");
    }
    double lo = hi;
    while (moment(lo * 0.5) <= 2.0) {
        lo *= 0.5;
        if (lo < 1e-280) {
            est.zero = true;  // moment stays <= 2 at every scale: W = 0 a.s.
            est.value = 0.0;
            est.lo = 0.0;
            est.hi = hi;
            return est;
        }
    }
    lo *= 0.5;  // bracket: moment(lo) > 2 >= moment(hi), moment decreasing in c
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (moment(mid) <= 2.0)
            hi = mid;
        else
            lo = mid;
    }
    est.value = hi;
    est.lo = lo;
    est.hi = hi;
    return est;
}

ScalarLaw scalar_law_of(const DistributionSpec& law) {
    if (law.has_finite_support()) {
        FiniteSupport s = law.support();
        if (s.dim() != 1)
            throw std::invalid_argument("psi norm: scalar law required");
        std::vector<double> vals;
        vals.reserve(s.size());
        for (const auto& a : s.atoms) vals.push_back(a[0]);
        return ScalarLaw::finite(std::move(vals), std::move(s.probs));
    }
    if (law.kind == DistributionSpec::Kind::Gaussian && law.dimension == 1)
        return ScalarLaw::gaussian(law.mean, law.sd);
    throw std::invalid_argument("psi norm: unsupported law kind for exact mode");
}

}  // namespace

PsiNormEstimate psi_norm(const ScalarLaw& law, double alpha, double tol) {
    return norm_by_bisection(law, alpha, tol,
                             law.kind == ScalarLaw::Kind::Finite
                                 ? PsiNormEstimate::Mode::ExactFinite
                                 : PsiNormEstimate::Mode::Quadrature);
}

PsiNormEstimate psi_norm(const DistributionSpec& law, double alpha, double tol) {
    return psi_norm(scalar_law_of(law), alpha, tol);
}

PsiNormEstimate psi_norm_empirical(std::span<const double> samples, double alpha,
                                   double tol) {
    if (samples.size() < 2)
        throw std::invalid_argument("empirical psi norm: need at least 2 samples");
    ScalarLaw law;
    law.kind = ScalarLaw::Kind::Finite;
    law.values.assign(samples.begin(), samples.end());
    law.probs.assign(samples.size(), 1.0 / static_cast<double>(samples.size()));
    return norm_by_bisection(law, alpha, tol, PsiNormEstimate::Mode::Empirical);
}

TailCheckReport psi_tail_check(const PsiNormEstimate& est, const DistributionSpec& law) {
    const ScalarLaw sl = scalar_law_of(law);
    if (sl.kind != ScalarLaw::Kind::Finite)
        throw std::invalid_argument("tail check: finite support required");
    std::vector<double> mags;
    mags.reserve(sl.values.size());
    for (double v : sl.values) mags.push_back(std::abs(v));
    std::sort(mags.begin(), mags.end());
    mags.erase(std::unique(mags.begin(), mags.end()), mags.end());

    TailCheckReport rep;
    for (std::size_t k = 0; k < mags.size(); ++k) {
        rep.grid.push_back(mags[k]);
        if (k + 1 < mags.size()) rep.grid.push_back(0.5 * (mags[k] + mags[k + 1]));
    }
    if (!mags.empty()) rep.grid.push_back(mags.back() * 1.5 + 1.0);

    rep.pass = true;
    for (double t : rep.grid) {
        if (t <= 0.0) continue;
        double p = 0.0;
        for (std::size_t k = 0; k < sl.values.size(); ++k)
            if (std::abs(sl.values[k]) >= t) p += sl.probs[k];
        double bound;
        if (est.value <= 0.0)
            bound = p > 0.0 ? 0.0 : 1.0;  // zero norm only for the zero variable
        else
            bound = 2.0 * std::exp(-std::pow(t / est.value, est.alpha));
        const double ratio = bound > 0.0 ? p / bound : (p > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
        if (ratio > 1.0 + 1e-9) rep.pass = false;
    }
    return rep;
}

std::pair<double, double> conditional_psi_bound(const KernelFamily& structured,
                                                const std::vector<DistributionSpec>& laws,
                                                double alpha, double beta) {
    if (!structured.is_structured())
        throw std::invalid_argument("conditional psi bound: structured kernel required");
    double c_phi = 0.0, c_psi = 0.0;
    for (std::size_t i = 0; i < laws.size(); ++i) {
        const auto& law = laws[i];
        if (!law.is_product())
            throw std::invalid_argument(
                "conditional psi bound: product-form laws with finite X required");
        for (std::size_t a = 0; a < law.x_marginal.size(); ++a) {
            const auto& x = law.x_marginal.atoms[a];
            const auto& ylaw = law.y_given_x[a];
            const auto value_law = [&](const KernelFamily::PointFn& fn) -> ScalarLaw {
                std::vector<double> z(x.begin(), x.end());
                z.push_back(0.0);
                if (ylaw.is_finite()) {
                    std::vector<double> vals;
                    vals.reserve(ylaw.atoms.size());
                    for (double y : ylaw.atoms) {
                        z.back() = y;
                        vals.push_back(fn(static_cast<int>(i), z));
                    }
                    return ScalarLaw::finite(std::move(vals), ylaw.probs);
                }
                auto zi = std::make_shared<std::vector<double>>(std::move(z));
                const int idx = static_cast<int>(i);
                return ScalarLaw::gaussian(ylaw.mean, ylaw.sd, [zi, fn, idx](double y) {
                    (*zi).back() = y;
                    return fn(idx, *zi);
                });
            };
            c_phi = std::max(c_phi, psi_norm(value_law(structured.phi), alpha).value);
            c_psi = std::max(c_psi, psi_norm(value_law(structured.psi), beta).value);
        }
    }
    return {c_phi, c_psi};
}

}  // namespace ustat
