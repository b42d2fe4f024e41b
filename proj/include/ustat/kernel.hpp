#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ustat/distribution.hpp"
#include "ustat/reduce.hpp"

namespace ustat {

// A family {f_{i,j}} of pair kernels over indices 1..n. Generic form is an
// arbitrary callable; structured form is phi(z) w_{i,j}(x,x') psi(z') with a
// runtime-checked bound on w; matrix form is the quadratic statistic
// sum A_{i,j} y_i y_j over scalar samples.
struct KernelFamily {
    enum class Form { Generic, Structured, Matrix };
    enum class Degeneracy { Asserted, Projected, Unknown };

    using PairFn =
        std::function<double(int, int, std::span<const double>, std::span<const double>)>;
    using PointFn = std::function<double(int, std::span<const double>)>;
    using WeightFn =
        std::function<double(int, int, std::span<const double>, std::span<const double>)>;

    Form form = Form::Generic;
    bool symmetric = false;
    Degeneracy degeneracy = Degeneracy::Unknown;

    PairFn f;           // Generic
    PointFn phi, psi;   // Structured: act on the full z vector
    WeightFn w;         // Structured: acts on the leading x components
    double bw_bound = 0.0;
    int x_dim = 0;      // Structured: z = [x(0..x_dim-1), y...]

    std::vector<double> matrix;  // Matrix: row-major n x n, zero diagonal
    int matrix_n = 0;

    static KernelFamily generic(PairFn fn, bool symmetric = false,
                                Degeneracy deg = Degeneracy::Unknown);
    static KernelFamily structured(PointFn phi, WeightFn w, PointFn psi,
                                   double bw_bound, int x_dim,
                                   Degeneracy deg = Degeneracy::Unknown);
    static KernelFamily from_matrix(std::vector<double> a, int n);

    bool is_structured() const { return form == Form::Structured; }

    // f_{i,j}(zi, zj); throws on non-finite values and on |w| > bw_bound.
    double evaluate(int i, int j, std::span<const double> zi,
                    std::span<const double> zj) const;

    // Kernel scaled by a constant (shares the underlying callables).
    KernelFamily scaled(double c) const;
};

struct UStatOptions {
    bool include_diagonal = false;  // V-statistic toggle
    bool parallel = true;
};

// sum_{i != j} f_{i,j}(Z_i, Z_j) with the fixed tree-reduction order.
// second gives the decoupled variant (Z_j drawn from it).
double evaluate_ustat(const KernelFamily& kernel, const SampleBatch& batch,
                      const SampleBatch* second = nullptr,
                      UStatOptions opts = {});

// sum_{i != j} eps_i eps'_j f_{i,j}(Z_i, Z'_j); same reduction order.
double evaluate_ustat_signed(const KernelFamily& kernel, const SampleBatch& batch,
                             const SampleBatch& second,
                             std::span<const double> eps,
                             std::span<const double> eps_prime,
                             bool parallel = true);

// Smoothing kernels used by the builtin estimators. Product form across
// coordinates for boxcar and epanechnikov; spherical for gaussian.
enum class SmoothingKernel { Boxcar, Gaussian, Epanechnikov };
SmoothingKernel smoothing_kernel_from_name(const std::string& name);
double smoothing_eval(SmoothingKernel k, std::span<const double> u);

// (n(n-1)h^p)^{-1} sum_{i != j} K((X_i - X_j)/h); rows are X in R^p.
double quadratic_functional(const SampleBatch& batch, double h, SmoothingKernel k,
                            int p, bool parallel = true);

// (n(n-1)h^p)^{-1} sum_{i != j} Y_i K((X_i - X_j)/h) Y_j; rows are (X, Y).
double conditional_mean_stat(const SampleBatch& batch, double h, SmoothingKernel k,
                             int p, bool parallel = true);

}  // namespace ustat
