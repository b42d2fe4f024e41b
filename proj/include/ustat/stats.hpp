#pragma once

#include <cstdint>
#include <span>

namespace ustat {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

// Exact (Clopper-Pearson) binomial interval for k successes in n trials.
Interval clopper_pearson(std::int64_t k, std::int64_t n, double confidence = 0.99);
// One-sided exact bounds at the given confidence.
double binomial_upper_bound(std::int64_t k, std::int64_t n, double confidence = 0.99);
double binomial_lower_bound(std::int64_t k, std::int64_t n, double confidence = 0.99);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace ustat
