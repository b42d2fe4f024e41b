#pragma once

#include <span>
#include <string>
#include <vector>

#include "ustat/constants.hpp"
#include "ustat/distribution.hpp"
#include "ustat/uprocess.hpp"

namespace ustat {

// Per-term universal multipliers; the theory only asserts existence, so the
// defaults are 1 and fitting exhibits the minimal data-consistent value.
struct EnvelopeConstants {
    double c = 1.0;          // sqrt(p) and p terms of the moment bound
    double c_alpha = 1.0;
    double c_beta = 1.0;
    double c_alpha_beta = 1.0;
    double k_tail = 1.0;     // K' of the tail bound
    double k_uproc = 1.0;    // K of the U-process moment bound
    double c_maximal = 1.0;  // C of the maximal inequality
    bool fitted = false;
};

struct TermBreakdown {
    double value = 0.0;
    std::vector<std::string> labels;
    std::vector<double> terms;
    int regime = 0;  // index of the largest term
};

// First moment bound. literal_reading keeps the beta-indexed constant in the
// alpha-weighted log term instead of the proof's alpha quantity.
TermBreakdown moment_envelope_bound(const LambdaProfile& prof, double p,
                                    const EnvelopeConstants& constants = {},
                                    bool literal_reading = false);

struct TailEnvelope {
    LambdaProfile profile;
    EnvelopeConstants constants;
    bool strict_exponent = false;  // use the statement's 1/2 + beta* exponent

    // K' * T(t) with the seven-term breakdown.
    TermBreakdown evaluate(double t) const;
};

// Smallest K' such that the Clopper-Pearson 99% upper bound on
// P(|U| >= K' T(t)) stays below 2 exp(-t) at every probed t.
// sorted_abs must be the ascending |statistic| sample.
double fit_tail_constant(const TailEnvelope& envelope,
                         std::span<const double> sorted_abs,
                         std::span<const double> t_grid, double rel_tol = 1e-3);

struct MaximalBound {
    Thm32Terms terms;
    double j2_at_a = 0.0;
    double bound = 0.0;  // C ||F||_{2,P} J2(a) [1 + J2(a) b^2 / a^2]
    bool j2_lower_bound_flag = true;
};

// The maximal inequality right-hand side; a < A_n or b < B_n is rejected.
MaximalBound maximal_bound(const FiniteKernelClass& cls,
                           const std::vector<DistributionSpec>& laws, double a,
                           double b, const std::vector<DiscreteMeasure>& q_family,
                           const EnvelopeConstants& constants = {});

// U-process moment bound evaluated verbatim from its nine terms.
TermBreakdown uprocess_envelope(const Thm31Terms& terms, double p, double alpha,
                                double beta, int n,
                                const EnvelopeConstants& constants = {});

struct LemmaReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

// Explicit-constant moment inequality for sums of independent mean-zero
// variables (enumerated exactly; laws must be scalar finite-support).
LemmaReport sum_moment_lemma(const std::vector<DistributionSpec>& laws, double p);
// Maxima/mean moment split for independent nonnegative-order moments.
LemmaReport max_moment_lemma(const std::vector<DistributionSpec>& laws, double p,
                             double alpha);

}  // namespace ustat
