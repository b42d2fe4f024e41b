#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ustat/distribution.hpp"
#include "ustat/kernel.hpp"

namespace ustat {

// Scalar law of |W| for Orlicz-norm computation: weighted atoms, or a
// transformed Gaussian integrated by quadrature.
struct ScalarLaw {
    enum class Kind { Finite, GaussianTransformed };
    Kind kind = Kind::Finite;
    std::vector<double> values;  // Finite
    std::vector<double> probs;
    double mean = 0.0, sd = 1.0;                  // GaussianTransformed input
    std::function<double(double)> transform;      // value = transform(y)

    static ScalarLaw finite(std::vector<double> values, std::vector<double> probs);
    static ScalarLaw gaussian(double mean, double sd,
                              std::function<double(double)> transform = {});
    double max_abs() const;  // Finite only
};

struct PsiNormEstimate {
    double alpha = 1.0;
    double value = 0.0;
    enum class Mode { ExactFinite, Quadrature, Empirical } mode = Mode::ExactFinite;
    double lo = 0.0, hi = 0.0;  // final bisection bracket
    double tolerance = 1e-6;
    bool zero = false;  // W == 0 a.s.; value 0 by convention
};

// E exp(|W|^alpha / c^alpha), evaluated overflow-safely.
double psi_moment(const ScalarLaw& law, double alpha, double c);

// Infimal c with psi_moment <= 2, by monotone bisection (relative tol).
PsiNormEstimate psi_norm(const ScalarLaw& law, double alpha, double tol = 1e-6);
PsiNormEstimate psi_norm(const DistributionSpec& law, double alpha, double tol = 1e-6);
// Plug-in empirical measure; flagged, never an oracle.
PsiNormEstimate psi_norm_empirical(std::span<const double> samples, double alpha,
                                   double tol = 1e-6);

struct TailCheckReport {
    double worst_ratio = 0.0;  // max over grid of P(|W| >= t) / bound(t)
    bool pass = false;
    std::vector<double> grid;
};

// P(|W| >= t) <= 2 exp(-(t/c)^alpha) on a grid covering the finite support.
TailCheckReport psi_tail_check(const PsiNormEstimate& est, const DistributionSpec& law);

// Smallest constants making the conditional psi_alpha (resp. psi_beta)
// moment condition hold at every X atom: C_phi for phi(Z)|X=x, C_psi for
// psi(Z)|X=x. Laws must carry a finite X marginal (product form).
std::pair<double, double> conditional_psi_bound(const KernelFamily& structured,
                                                const std::vector<DistributionSpec>& laws,
                                                double alpha, double beta);

}  // namespace ustat
