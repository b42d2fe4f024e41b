#include "ustat/kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ustat {

KernelFamily KernelFamily::generic(PairFn fn, bool symmetric, Degeneracy deg) {
    KernelFamily k;
    k.form = Form::Generic;
    k.f = std::move(fn);
    k.symmetric = symmetric;
    k.degeneracy = deg;
    return k;
}

KernelFamily KernelFamily::structured(PointFn phi, WeightFn w, PointFn psi,
                                      double bw_bound, int x_dim, Degeneracy deg) {
    if (!(bw_bound >= 0.0)) throw std::invalid_argument("structured kernel: bad weight bound");
    if (x_dim < 1) throw std::invalid_argument("structured kernel: x_dim must be >= 1");
    KernelFamily k;
    k.form = Form::Structured;
    k.phi = std::move(phi);
    k.psi = std::move(psi);
    k.w = std::move(w);
    k.bw_bound = bw_bound;
    k.x_dim = x_dim;
    k.degeneracy = deg;
    return k;
}

KernelFamily KernelFamily::from_matrix(std::vector<double> a, int n) {
    if (static_cast<int>(a.size()) != n * n)
        throw std::invalid_argument("matrix kernel: size mismatch");
    for (int i = 0; i < n; ++i)
        if (a[static_cast<std::size_t>(i) * n + i] != 0.0)
            throw std::invalid_argument("matrix kernel: diagonal must be zero");
    KernelFamily k;
    k.form = Form::Matrix;
    k.matrix = std::move(a);
    k.matrix_n = n;
    bool sym = true;
    for (int i = 0; i < n && sym; ++i)
        for (int j = 0; j < n; ++j)
            if (k.matrix[static_cast<std::size_t>(i) * n + j] !=
                k.matrix[static_cast<std::size_t>(j) * n + i]) {
                sym = false;
                break;
            }
    k.symmetric = sym;
    return k;
}

double KernelFamily::evaluate(int i, int j, std::span<const double> zi,
                              std::span<const double> zj) const {
    double v = 0.0;
    switch (form) {
        case Form::Generic:
            v = f(i, j, zi, zj);
            break;
        case Form::Structured: {
            if (static_cast<int>(zi.size()) < x_dim || static_cast<int>(zj.size()) < x_dim)
                throw std::invalid_argument("structured kernel: sample dimension below x_dim");
            const double wv = w(i, j, zi.first(static_cast<std::size_t>(x_dim)),
                                zj.first(static_cast<std::size_t>(x_dim)));
            if (std::abs(wv) > bw_bound * (1.0 + 1e-12))
                throw std::runtime_error("structured kernel: weight exceeds declared bound");
            v = phi(i, zi) * wv * psi(j, zj);
            break;
        }
        case Form::Matrix:
            if (i >= matrix_n || j >= matrix_n)
                throw std::invalid_argument("matrix kernel: index out of range");
            v = matrix[static_cast<std::size_t>(i) * matrix_n + j] * zi[0] * zj[0];
            break;
    }
    if (!std::isfinite(v)) throw std::runtime_error("kernel evaluation is non-finite");
    return v;
}

KernelFamily KernelFamily::scaled(double c) const {
    KernelFamily k = *this;
    switch (form) {
        case Form::Generic: {
            auto base = f;
            k.f = [base, c](int i, int j, std::span<const double> a,
                            std::span<const double> b) { return c * base(i, j, a, b); };
            break;
        }
        case Form::Structured: {
            auto base = phi;
            k.phi = [base, c](int i, std::span<const double> z) { return c * base(i, z); };
            break;
        }
        case Form::Matrix:
            for (auto& a : k.matrix) a *= c;
            break;
    }
    return k;
}

namespace {

void check_batches(const SampleBatch& batch, const SampleBatch* second) {
    if (batch.n < 2) throw std::invalid_argument("ustat: need n >= 2 rows");
    if (second) {
        if (second->n != batch.n) throw std::invalid_argument("ustat: batch size mismatch");
        if (second->d != batch.d) throw std::invalid_argument("ustat: batch dimension mismatch");
    }
}

}  // namespace

double evaluate_ustat(const KernelFamily& kernel, const SampleBatch& batch,
                      const SampleBatch* second, UStatOptions opts) {
    check_batches(batch, second);
    const SampleBatch& b2 = second ? *second : batch;
    const std::size_t n = static_cast<std::size_t>(batch.n);
    if (opts.include_diagonal) {
        return reduce::indexed_sum(
            n * n,
            [&](std::size_t k) {
                const int i = static_cast<int>(k / n);
                const int j = static_cast<int>(k % n);
                return kernel.evaluate(i, j, batch.row(i), b2.row(j));
            },
            opts.parallel);
    }
    const reduce::PairIndexer pairs{n};
    return reduce::indexed_sum(
        pairs.count(),
        [&](std::size_t k) {
            const auto [i, j] = pairs(k);
            return kernel.evaluate(static_cast<int>(i), static_cast<int>(j),
                                   batch.row(static_cast<int>(i)),
                                   b2.row(static_cast<int>(j)));
        },
        opts.parallel);
}

double evaluate_ustat_signed(const KernelFamily& kernel, const SampleBatch& batch,
                             const SampleBatch& second,
                             std::span<const double> eps,
                             std::span<const double> eps_prime, bool parallel) {
    check_batches(batch, &second);
    if (eps.size() != static_cast<std::size_t>(batch.n) ||
        eps_prime.size() != static_cast<std::size_t>(batch.n))
        throw std::invalid_argument("ustat: sign vector length mismatch");
    const reduce::PairIndexer pairs{static_cast<std::size_t>(batch.n)};
    return reduce::indexed_sum(
        pairs.count(),
        [&](std::size_t k) {
            const auto [i, j] = pairs(k);
            return eps[i] * eps_prime[j] *
                   kernel.evaluate(static_cast<int>(i), static_cast<int>(j),
                                   batch.row(static_cast<int>(i)),
                                   second.row(static_cast<int>(j)));
        },
        parallel);
}

SmoothingKernel smoothing_kernel_from_name(const std::string& name) {
    if (name == "boxcar") return SmoothingKernel::Boxcar;
    if (name == "gaussian") return SmoothingKernel::Gaussian;
    if (name == "epanechnikov") return SmoothingKernel::Epanechnikov;
    throw std::invalid_argument("unknown smoothing kernel: " + name);
}

double smoothing_eval(SmoothingKernel k, std::span<const double> u) {
    switch (k) {
        case SmoothingKernel::Boxcar: {
            for (double v : u)
                if (std::abs(v) > 0.5) return 0.0;
            return 1.0;
        }
        case SmoothingKernel::Gaussian: {
            double q = 0.0;
            for (double v : u) q += v * v;
            const double norm =
                std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(u.size()));
            return norm * std::exp(-0.5 * q);
        }
        case SmoothingKernel::Epanechnikov: {
            double prod = 1.0;
            for (double v : u) {
                const double t = 1.0 - v * v;
                if (t <= 0.0) return 0.0;
                prod *= 0.75 * t;
            }
            return prod;
        }
    }
    return 0.0;
}

namespace {

double pair_average(const SampleBatch& batch, double h, SmoothingKernel k, int p,
                    bool with_y, bool parallel) {
    if (!(h > 0.0)) throw std::invalid_argument("estimator: bandwidth must be > 0");
    if (batch.n < 2) throw std::invalid_argument("estimator: need n >= 2");
    const int need = with_y ? p + 1 : p;
    if (batch.d < need) throw std::invalid_argument("estimator: batch dimension too small");
    const reduce::PairIndexer pairs{static_cast<std::size_t>(batch.n)};
    const double sum = reduce::indexed_sum(
        pairs.count(),
        [&, p](std::size_t kk) {
            const auto [i, j] = pairs(kk);
            const auto xi = batch.row(static_cast<int>(i));
            const auto xj = batch.row(static_cast<int>(j));
            double ubuf[16];
            std::vector<double> uvec;
            double* u = ubuf;
            if (p > 16) {
                uvec.resize(static_cast<std::size_t>(p));
                u = uvec.data();
            }
            for (int c = 0; c < p; ++c) u[c] = (xi[c] - xj[c]) / h;
            double term = smoothing_eval(k, {u, static_cast<std::size_t>(p)});
            if (with_y) term *= xi[p] * xj[p];
            return term;
        },
        parallel);
    const double scale =
        static_cast<double>(batch.n) * (batch.n - 1) * std::pow(h, p);
    return sum / scale;
}

}  // namespace

double quadratic_functional(const SampleBatch& batch, double h, SmoothingKernel k,
                            int p, bool parallel) {
    return pair_average(batch, h, k, p, false, parallel);
}

double conditional_mean_stat(const SampleBatch& batch, double h, SmoothingKernel k,
                             int p, bool parallel) {
    return pair_average(batch, h, k, p, true, parallel);
}

}  // namespace ustat
