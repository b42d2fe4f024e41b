#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ustat/rng.hpp"

namespace ustat {

// Enumeration guard: exact-mode operations refuse to enumerate joint state
// spaces above this many states instead of silently falling back to sampling.
inline constexpr std::size_t kEnumerationCap = std::size_t{1} << 24;

struct FiniteSupport {
    std::vector<std::vector<double>> atoms;  // one real vector per atom
    std::vector<double> probs;

    std::size_t size() const { return atoms.size(); }
    int dim() const { return atoms.empty() ? 0 : static_cast<int>(atoms[0].size()); }
    void validate() const;  // probs nonnegative, sum to 1 within 1e-12
};

// Scalar conditional law of Y given a fixed X atom.
struct ConditionalLaw {
    enum class Kind { Finite, Gaussian };
    Kind kind = Kind::Finite;
    std::vector<double> atoms;
    std::vector<double> probs;
    double mean = 0.0;
    double sd = 1.0;

    static ConditionalLaw finite(std::vector<double> atoms, std::vector<double> probs);
    static ConditionalLaw gaussian(double mean, double sd);
    bool is_finite() const { return kind == Kind::Finite; }
};

struct DistributionSpec {
    enum class Kind { FiniteSupport, Gaussian, Rademacher, WeibullTail, ProductXY, UserSampler };

    Kind kind = Kind::Rademacher;
    int dimension = 1;

    FiniteSupport finite;          // FiniteSupport
    double mean = 0.0, sd = 1.0;   // Gaussian (iid components)
    double shape = 1.0;            // WeibullTail: P(|W| > t) = exp(-t^shape)
    FiniteSupport x_marginal;      // ProductXY: finite X marginal
    std::vector<ConditionalLaw> y_given_x;  // one per X atom; z = [x..., y]
    std::string sampler_id;        // UserSampler

    static DistributionSpec finite_support(FiniteSupport s);
    static DistributionSpec finite_scalar(std::vector<double> atoms, std::vector<double> probs);
    static DistributionSpec gaussian(double mean, double sd, int dim = 1);
    static DistributionSpec rademacher(int dim = 1);
    static DistributionSpec weibull_tail(double shape);
    static DistributionSpec product_xy(FiniteSupport x, std::vector<ConditionalLaw> y);
    static DistributionSpec user_sampler(std::string id);

    void validate() const;
    bool has_finite_support() const;
    // Flattened finite support over the full z vector; throws for continuous laws.
    FiniteSupport support() const;
    void sample(rng::Stream& rs, std::span<double> out) const;

    // ProductXY helpers. x_dim() is the number of leading z components
    // holding X; scalar Y sits at index x_dim().
    bool is_product() const { return kind == Kind::ProductXY; }
    int x_dim() const;
};

struct SampleBatch {
    int n = 0;
    int d = 0;
    std::vector<double> values;  // row-major n x d
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;

    std::span<const double> row(int i) const {
        return {values.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
    }
    std::span<double> row(int i) {
        return {values.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
    }
    void validate() const;  // all entries finite, sizes consistent
};

// Stream-id tags for batch sampling (Z vs the independent copy Z').
inline constexpr std::uint64_t kStreamZ = 1;
inline constexpr std::uint64_t kStreamZPrime = 2;
inline constexpr std::uint64_t kStreamEps = 3;
inline constexpr std::uint64_t kStreamEpsPrime = 4;

SampleBatch sample_batch(const std::vector<DistributionSpec>& laws,
                         std::uint64_t seed, std::uint64_t replication,
                         std::uint64_t stream_tag = kStreamZ);

void write_batch_csv(const SampleBatch& batch, const std::string& path);
SampleBatch read_batch_csv(const std::string& path);

// User-sampler registry (all samplers draw from the provided stream only).
struct SamplerRegistry {
    using Fn = std::function<void(rng::Stream&, std::span<double>)>;
    static void add(const std::string& id, int dim, Fn fn);
    static const std::pair<int, Fn>& get(const std::string& id);
    static bool contains(const std::string& id);
};

// Exact joint enumeration over finite supports. fn(idx, prob) is called once
// per joint atom with idx[i] the atom index of law i. Throws when the state
// count exceeds kEnumerationCap.
std::size_t joint_state_count(const std::vector<FiniteSupport>& sup);

template <class Fn>
void for_each_joint(const std::vector<FiniteSupport>& sup, Fn&& fn) {
    const std::size_t n = sup.size();
    std::vector<std::size_t> idx(n, 0);
    if (n == 0) return;
    (void)joint_state_count(sup);  // cap check
    while (true) {
        double p = 1.0;
        for (std::size_t i = 0; i < n; ++i) p *= sup[i].probs[idx[i]];
        fn(const_cast<const std::vector<std::size_t>&>(idx), p);
        std::size_t i = 0;
        for (; i < n; ++i) {
            if (++idx[i] < sup[i].size()) break;
            idx[i] = 0;
        }
        if (i == n) break;
    }
}

// Materialize the joint atom `idx` as a sample batch (one row per law).
SampleBatch batch_from_atoms(const std::vector<FiniteSupport>& sup,
                             const std::vector<std::size_t>& idx);

}  // namespace ustat
