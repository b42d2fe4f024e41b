#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

// Deterministic summation. All reductions in this project go through the
// fixed pairwise (tree) order defined here, so serial and parallel paths
// produce bit-identical results for any worker count.

namespace ustat::reduce {

inline constexpr std::size_t kChunk = 4096;

// Pairwise reduction of term(k) for k in [lo, hi). The split point depends
// only on (lo, hi), never on the thread count.
template <class Term>
double pairwise(std::size_t lo, std::size_t hi, Term&& term) {
    const std::size_t len = hi - lo;
    if (len <= 16) {
        double acc = 0.0;
        for (std::size_t k = lo; k < hi; ++k) acc += term(k);
        return acc;
    }
    const std::size_t mid = lo + len / 2;
    return pairwise(lo, mid, term) + pairwise(mid, hi, term);
}

template <class Term>
double indexed_sum_serial(std::size_t count, Term&& term) {
    if (count == 0) return 0.0;
    const std::size_t nchunks = (count + kChunk - 1) / kChunk;
    std::vector<double> partial(nchunks);
    for (std::size_t c = 0; c < nchunks; ++c) {
        const std::size_t lo = c * kChunk;
        const std::size_t hi = lo + kChunk < count ? lo + kChunk : count;
        partial[c] = pairwise(lo, hi, term);
    }
    return pairwise(0, nchunks, [&](std::size_t c) { return partial[c]; });
}

template <class Term>
double indexed_sum_parallel(std::size_t count, Term&& term) {
    if (count == 0) return 0.0;
    const std::size_t nchunks = (count + kChunk - 1) / kChunk;
    std::vector<double> partial(nchunks);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(nchunks); ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
        const std::size_t hi = lo + kChunk < count ? lo + kChunk : count;
        partial[static_cast<std::size_t>(c)] = pairwise(lo, hi, term);
    }
    return pairwise(0, nchunks, [&](std::size_t c) { return partial[c]; });
}

template <class Term>
double indexed_sum(std::size_t count, Term&& term, bool parallel) {
    return parallel ? indexed_sum_parallel(count, term)
                    : indexed_sum_serial(count, term);
}

inline double pairwise_sum(std::span<const double> xs) {
    return indexed_sum_serial(xs.size(), [&](std::size_t k) { return xs[k]; });
}

// Naive left-to-right sum, kept as an independent reference for tests.
inline double naive_sum(std::span<const double> xs) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc;
}

// Flat index -> ordered pair (i, j), i != j, row-major with the diagonal
// removed: k = i*(n-1) + (j - (j > i)).
struct PairIndexer {
    std::size_t n;
    std::size_t count() const { return n * (n - 1); }
    std::pair<std::size_t, std::size_t> operator()(std::size_t k) const {
        const std::size_t i = k / (n - 1);
        const std::size_t r = k % (n - 1);
        return {i, r + (r >= i ? 1 : 0)};
    }
};

inline int max_workers() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_workers(int w) {
#ifdef _OPENMP
    if (w > 0) omp_set_num_threads(w);
#else
    (void)w;
#endif
}

}  // namespace ustat::reduce
