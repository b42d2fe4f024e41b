#pragma once

#include <cstdint>
#include <vector>

#include "ustat/constants.hpp"
#include "ustat/distribution.hpp"
#include "ustat/kernel.hpp"

namespace ustat {

// Finite family of kernel collections sharing the index structure, with a
// pointwise envelope and uniform bounds (checked on every evaluated point).
struct FiniteKernelClass {
    std::vector<KernelFamily> members;
    KernelFamily envelope;          // F with |f| <= F pointwise
    bool has_envelope = false;
    double uniform_bound = 0.0;     // R >= sup |f|
    double class_weight_bound = 0.0;  // B_W for structured members

    // Member evaluation with domination checks.
    double eval(int member, int i, int j, std::span<const double> zi,
                std::span<const double> zj) const;
};

struct SupResult {
    double value = 0.0;
    int argmax = 0;  // lowest index on ties
};

// sup_w |sum eps_i eps'_j f_{i,j}(Z_i, Z'_j)|.
SupResult sup_ustat(const FiniteKernelClass& cls, const SampleBatch& z,
                    const SampleBatch& zp, std::span<const double> eps,
                    std::span<const double> eps_prime, bool parallel = false);
// One-sample symmetrized version sup_f |sum eps_i eps_j f_{i,j}(X_i, X_j)|.
SupResult sup_ustat_symmetrized(const FiniteKernelClass& cls, const SampleBatch& x,
                                std::span<const double> eps, bool parallel = false);

struct DiscreteMeasure {
    std::vector<std::vector<double>> atoms;
    std::vector<double> probs;
    static DiscreteMeasure from_support(const FiniteSupport& s);
    static DiscreteMeasure uniform(std::vector<std::vector<double>> atoms);
};

// Pair-weighted L2(Q) metric over the measure's atom pairs.
double pair_metric(const FiniteKernelClass& cls, int member_a, int member_b,
                   const DiscreteMeasure& q);
double envelope_norm(const FiniteKernelClass& cls, const DiscreteMeasure& q);

struct CoveringResult {
    int count = 0;
    bool exact = true;     // exhaustive set cover vs greedy 2-approximation
    int lower_bound = 0;   // packing bound, valid in both cases
};
CoveringResult covering_number(const FiniteKernelClass& cls, const DiscreteMeasure& q,
                               double eta);

struct EntropyProfile {
    std::vector<double> eta_grid;
    std::vector<int> covering;
    double j2 = 0.0;
    bool lower_bound_flag = true;  // Q-family stands in for the sup over all Q
};

// J2(delta) = max over supplied Q of the exact piecewise integral of
// log N(eta ||F||_{2,Q}) over (0, delta].
EntropyProfile entropy_integral(const FiniteKernelClass& cls, double delta,
                                const std::vector<DiscreteMeasure>& q_family);

struct McConfig {
    int replications = 2000;
    std::uint64_t seed = 0;
};

// The nine right-hand-side quantities of the U-process moment bound.
struct Thm31Terms {
    double e_n1 = 0.0, e_n2 = 0.0;          // MC
    double e_n1_se = 0.0, e_n2_se = 0.0;
    double w_n1 = 0.0, w_n2 = 0.0;          // MC over Z/eps, inner sup exact
    double w_n1_se = 0.0, w_n2_se = 0.0;
    double sigma_n1 = 0.0, sigma_n2 = 0.0;  // exact over atoms
    double lambda_2 = 0.0;
    double op_norm = 0.0;                   // sup_w sigma-weighted operator norm
    double e_u1 = 0.0;                      // E[sup_w |U^(1)(w)|], MC
    double e_u1_se = 0.0;
};
Thm31Terms thm31_terms(const FiniteKernelClass& cls,
                       const std::vector<DistributionSpec>& laws, double c_phi,
                       double c_psi, double alpha, double beta,
                       const McConfig& mc);

// Exact maximal-inequality quantities over finite supports.
struct Thm32Terms {
    double gamma_n1 = 0.0, gamma_n2 = 0.0;
    double sigma_n = 0.0;
    double env_norm = 0.0;  // ||F||_{2,P}
    double a_n = 0.0, b_n = 0.0;
};
Thm32Terms thm32_terms(const FiniteKernelClass& cls,
                       const std::vector<DistributionSpec>& laws);
// E[sup_f |sum eps_i eps_j f(X_i,X_j)| / sqrt(n(n-1))], exact enumeration.
double thm32_lhs(const FiniteKernelClass& cls,
                 const std::vector<DistributionSpec>& laws);

}  // namespace ustat
