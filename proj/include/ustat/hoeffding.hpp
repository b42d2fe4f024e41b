#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ustat/distribution.hpp"
#include "ustat/kernel.hpp"

namespace ustat {

// How per-index expectations are realized: full support enumeration for
// finite laws, or a fixed nested Monte Carlo draw with its own sub-seed.
struct ExpectationMode {
    enum class Kind { ExactFinite, NestedMC };
    Kind kind = Kind::ExactFinite;
    int samples = 4096;
    std::uint64_t seed = 0;

    static ExpectationMode exact() { return {}; }
    static ExpectationMode nested_mc(int samples, std::uint64_t seed) {
        return {Kind::NestedMC, samples, seed};
    }
    bool exact_mode() const { return kind == Kind::ExactFinite; }
};

// Per-index atom cache: either the true finite support or an equal-weight
// Monte Carlo cloud. All conditional expectations reduce to weighted sums
// over these atoms, which keeps exact and MC modes on one code path.
struct AtomCache {
    std::vector<SampleBatch> atoms;   // atoms[i].row(a) is atom a of index i
    std::vector<std::vector<double>> probs;
    bool exact = false;

    static AtomCache build(const std::vector<DistributionSpec>& laws,
                           const ExpectationMode& mode);
    int n() const { return static_cast<int>(probs.size()); }
    std::size_t size(int i) const { return probs[static_cast<std::size_t>(i)].size(); }
    std::span<const double> atom(int i, std::size_t a) const {
        return atoms[static_cast<std::size_t>(i)].row(static_cast<int>(a));
    }
    double prob(int i, std::size_t a) const {
        return probs[static_cast<std::size_t>(i)][a];
    }
};

struct HoeffdingSplit {
    KernelFamily degenerate;                           // f^D
    std::function<double(int, std::span<const double>)> g;  // g_j(z)
    std::function<double(int, std::span<const double>)> h;  // h_i(z)
    double grand_mean = 0.0;                           // sum_{i != j} E f_{i,j}
    bool exact = false;
    std::string mode_note;

    // U_n(f^D) + sum g_j(Z_j) + sum h_i(Z_i) + grand_mean on a sample.
    double reconstruct(const SampleBatch& batch, bool parallel = false) const;
};

HoeffdingSplit hoeffding_project(const KernelFamily& kernel,
                                 const std::vector<DistributionSpec>& laws,
                                 const ExpectationMode& mode = {});

struct DegeneracyReport {
    double max_abs_conditional_mean = 0.0;
    double threshold = 0.0;
    bool pass = false;
    bool exact = false;
};

DegeneracyReport degeneracy_check(const KernelFamily& kernel,
                                  const std::vector<DistributionSpec>& laws,
                                  const ExpectationMode& mode = {});

// Conditional-mean helpers over an atom cache (integrating out the other
// argument of f_{i,j}). Used by the projection and by the constants module.
double cond_mean_given_first(const KernelFamily& kernel, const AtomCache& cache,
                             int i, int j, std::span<const double> zi);
double cond_mean_given_second(const KernelFamily& kernel, const AtomCache& cache,
                              int i, int j, std::span<const double> zj);
double pair_mean(const KernelFamily& kernel, const AtomCache& cache, int i, int j);

}  // namespace ustat
