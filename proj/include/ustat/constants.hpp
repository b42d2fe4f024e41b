#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ustat/distribution.hpp"
#include "ustat/hoeffding.hpp"
#include "ustat/kernel.hpp"

namespace ustat {

// log n floored at 1 so no log factor shrinks an envelope.
inline double log_n(int n) {
    return std::log(std::max(static_cast<double>(n), std::exp(1.0)));
}

struct LambdaProfile {
    // First moment-bound family.
    double lambda_half = 0.0;
    double lambda_one = 0.0;
    double lambda_alpha = 0.0;
    double lambda_beta = 0.0;
    // Structured (bounded-weight) family.
    double lambda_2 = 0.0;
    double lambda_32_alpha = 0.0;
    double lambda_32_beta = 0.0;
    double lambda_alpha_star = 0.0;
    double lambda_beta_star = 0.0;

    double alpha = 1.0, beta = 1.0;
    double alpha_star = 1.0, beta_star = 1.0;  // min(., 1)
    double k_f = 0.0, k_g = 0.0;
    double c_phi = 0.0, c_psi = 0.0, b_w = 0.0;
    int n = 0;
    std::vector<std::string> notes;  // provenance per entry

    void set_orders(double a, double b) {
        alpha = a;
        beta = b;
        alpha_star = std::min(a, 1.0);
        beta_star = std::min(b, 1.0);
    }
    std::string to_jsonl() const;  // one flat JSON record
};

struct EstimateResult {
    double value = 0.0;
    double se = 0.0;  // 0 in exact mode
    bool exact = true;
};

// (sum_{i != j} E f_{i,j}^2)^{1/2}; exact over finite supports, otherwise MC
// with a divergence check across batch doublings.
EstimateResult lambda_half(const KernelFamily& kernel,
                           const std::vector<DistributionSpec>& laws,
                           const ExpectationMode& mode = {});

// L2->L2 norm of the kernel collection: largest singular value of the block
// matrix M[(i,a),(j,b)] = f_{i,j}(z_a, z_b) sqrt(p_i(a) p_j(b)) with zero
// diagonal blocks. Exact for finite supports.
struct OperatorNormResult {
    double value = 0.0;
    bool converged = true;
    bool dense_checked = false;
    double dense_value = 0.0;
    int iterations = 0;
};
OperatorNormResult operator_norm(const KernelFamily& kernel,
                                 const std::vector<DistributionSpec>& laws);

// Restricted-basis variant for laws without usable finite support: the sup
// over gamma_i, delta_j runs over the span of a per-index dictionary only,
// so the result is a lower bound of the true norm.
OperatorNormResult operator_norm_restricted(
    const KernelFamily& kernel, const std::vector<DistributionSpec>& laws,
    const std::vector<std::vector<std::function<double(std::span<const double>)>>>& basis,
    const ExpectationMode& mode);

struct LambdaAlphaBetaResult {
    double lambda_alpha = 0.0;
    double lambda_beta = 0.0;
    double trivial_upper_alpha = 0.0;  // K_F route, for cross-checking
    double trivial_upper_beta = 0.0;
    double k_f = 0.0, k_g = 0.0;
};
// max_i || sum_{j != i} E[f^2 | Z_i] ||_{psi_{alpha/2}}^{1/2} and the
// symmetric beta quantity; finite-support laws only.
LambdaAlphaBetaResult lambda_alpha_beta(const KernelFamily& kernel,
                                        const std::vector<DistributionSpec>& laws,
                                        double alpha, double beta);

// Conditional second moments for structured kernels: sigma_phi(i, a) is
// sqrt(E[phi^2(Z_i) | X_i = x_a]) at the a-th X atom of law i.
struct ConditionalMoments {
    std::function<double(int, std::size_t)> sigma_phi;
    std::function<double(int, std::size_t)> sigma_psi;
    bool exact = true;
};
ConditionalMoments conditional_moments(const KernelFamily& structured,
                                       const std::vector<DistributionSpec>& laws);

// Fill the structured Lambda family (and the sigma-weighted lambda_half,
// lambda_one) for a bounded-weight kernel over product-form laws.
LambdaProfile structured_lambdas(const KernelFamily& structured,
                                 const std::vector<DistributionSpec>& laws,
                                 double c_phi, double c_psi, double alpha,
                                 double beta);

}  // namespace ustat
