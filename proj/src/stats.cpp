#include "ustat/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <stdexcept>

namespace ustat {

double binomial_lower_bound(std::int64_t k, std::int64_t n, double confidence) {
    if (n <= 0 || k < 0 || k > n) throw std::invalid_argument("binomial bound: bad counts");
    if (k == 0) return 0.0;
    const double a = 1.0 - confidence;
    return boost::math::ibeta_inv(static_cast<double>(k),
                                  static_cast<double>(n - k + 1), a);
}

double binomial_upper_bound(std::int64_t k, std::int64_t n, double confidence) {
    if (n <= 0 || k < 0 || k > n) throw std::invalid_argument("binomial bound: bad counts");
    if (k == n) return 1.0;
    const double a = 1.0 - confidence;
    return boost::math::ibeta_inv(static_cast<double>(k + 1),
                                  static_cast<double>(n - k), 1.0 - a);
}

Interval clopper_pearson(std::int64_t k, std::int64_t n, double confidence) {
    const double half = 0.5 * (1.0 - confidence);
    Interval iv;
    iv.lo = binomial_lower_bound(k, n, 1.0 - half);
    iv.hi = binomial_upper_bound(k, n, 1.0 - half);
    return iv;
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least squares: need matched inputs, size >= 2");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("least squares: degenerate x values");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

}  // namespace ustat
