#pragma once

#include <cstdint>
#include <vector>

#include "ustat/distribution.hpp"
#include "ustat/hoeffding.hpp"
#include "ustat/kernel.hpp"
#include "ustat/orlicz.hpp"

namespace ustat {

// Degree-2 Rademacher chaos sum over eps_i eps_j a_{i,j}, zero diagonal.
struct ChaosSpec {
    std::vector<double> a;  // row-major n x n
    int n = 0;

    static ChaosSpec from_matrix(std::vector<double> a, int n);
    double coeff(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
    double s_n() const;  // (sum_{i != j} a^2)^{1/2}
};

enum class Transform { Decoupled, SymmetrizedDecoupled, Chaos };

// Seeded evaluator for the transformed statistic; replication r reads the
// derived streams (seed, r) for Z, Z', eps, eps'.
struct ResampledStatistic {
    KernelFamily kernel;
    std::vector<DistributionSpec> laws;
    Transform transform = Transform::SymmetrizedDecoupled;
    std::uint64_t seed = 0;

    double evaluate(std::uint64_t replication, bool parallel = false) const;
};

ResampledStatistic decouple_symmetrize(const KernelFamily& kernel,
                                       const std::vector<DistributionSpec>& laws,
                                       std::uint64_t seed);

// Exhaustive law of the transformed statistic for small finite instances
// (enumerates the joint of Z, Z' and the needed sign vectors).
ScalarLaw enumerate_statistic_law(const KernelFamily& kernel,
                                  const std::vector<DistributionSpec>& laws,
                                  Transform transform);

// Exhaustive law of the plain U-statistic sum_{i != j} f(Z_i, Z_j).
ScalarLaw enumerate_ustat_law(const KernelFamily& kernel,
                              const std::vector<DistributionSpec>& laws);

struct DecouplingReport {
    std::vector<double> p_values;
    std::vector<double> lhs_norms;   // ||U^D||_p
    std::vector<double> rhs_norms;   // ||sum eps eps' f^D(Z, Z')||_p
    std::vector<double> ratios;
    bool pass = false;               // every ratio <= 192
};

// Projects the kernel to its degenerate part first, then compares p-norms
// exactly by joint enumeration.
DecouplingReport decoupling_moment_check(const KernelFamily& kernel,
                                         const std::vector<DistributionSpec>& laws,
                                         const std::vector<double>& p_list);

struct ChaosReport {
    double psi1 = 0.0;
    double bound = 0.0;  // 4 e s_n
    bool pass = false;
};
ChaosReport chaos_psi1_check(const ChaosSpec& spec);

// Threshold-split of the symmetrized structured statistic into four pieces
// summing exactly to the full statistic on the given sample.
struct TruncationSplit {
    double t_phi = 0.0, t_psi = 0.0;
    double u1 = 0.0, u2 = 0.0, u3 = 0.0, u4 = 0.0;
    double total = 0.0;            // u1+u2+u3+u4
    double max_term1_summand = 0.0;
    double term1_bound = 0.0;      // T_phi B_w T_psi
    bool bound_ok = false;
    bool thresholds_exact = false;
};

// 8 E[max_i |fn(Z_i)| | X's]: the truncation threshold conditional on the X
// parts of the batch rows, with the Y's integrated out.
double truncation_threshold(const KernelFamily::PointFn& fn,
                            const std::vector<DistributionSpec>& laws,
                            const SampleBatch& batch, int x_dim,
                            const ExpectationMode& mode, bool& exact);

TruncationSplit truncation_split(const KernelFamily& structured,
                                 const std::vector<DistributionSpec>& laws,
                                 const SampleBatch& z, const SampleBatch& zp,
                                 std::span<const double> eps,
                                 std::span<const double> eps_prime,
                                 const ExpectationMode& mode = {});

}  // namespace ustat
