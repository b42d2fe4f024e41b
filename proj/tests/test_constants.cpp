#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "ustat/constants.hpp"
#include "ustat/orlicz.hpp"

using namespace ustat;

namespace {

std::vector<DistributionSpec> random_finite_laws(int n, std::uint64_t seed) {
    std::vector<DistributionSpec> laws;
    auto s = rng::Stream::derive(seed, {0x6c617773});
    for (int i = 0; i < n; ++i) {
        const double p = 0.2 + 0.6 * s.uniform();
        laws.push_back(DistributionSpec::finite_scalar(
            {2 * s.uniform() - 1, 2 * s.uniform() - 1}, {p, 1 - p}));
    }
    return laws;
}

KernelFamily random_pair_kernel(int n, std::uint64_t seed) {
    auto coef = std::make_shared<std::vector<double>>();
    auto s = rng::Stream::derive(seed, {0x636f6566});
    coef->resize(static_cast<std::size_t>(n) * n * 4);
    for (auto& c : *coef) c = 2 * s.uniform() - 1;
    return KernelFamily::generic(
        [coef, n](int i, int j, std::span<const double> a, std::span<const double> b) {
            const double* c = coef->data() + (static_cast<std::size_t>(i) * n + j) * 4;
            return c[0] + c[1] * a[0] + c[2] * b[0] + c[3] * a[0] * b[0];
        });
}

}  // namespace

TEST_CASE("lambda_half matches direct enumeration") {
    const int n = 4;
    const auto laws = random_finite_laws(n, 3);
    const auto kernel = random_pair_kernel(n, 3);
    double direct = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto& si = laws[static_cast<std::size_t>(i)].finite;
            const auto& sj = laws[static_cast<std::size_t>(j)].finite;
            for (std::size_t a = 0; a < si.size(); ++a)
                for (std::size_t b = 0; b < sj.size(); ++b) {
                    const double f = kernel.evaluate(i, j, si.atoms[a], sj.atoms[b]);
                    direct += si.probs[a] * sj.probs[b] * f * f;
                }
        }
    const auto est = lambda_half(kernel, laws);
    CHECK(est.exact);
    CHECK(est.value == doctest::Approx(std::sqrt(direct)).epsilon(1e-12));
}

TEST_CASE("lambda_half monte carlo agrees with exact") {
    const auto laws = random_finite_laws(4, 7);
    const auto kernel = random_pair_kernel(4, 7);
    const double exact = lambda_half(kernel, laws).value;
    const auto mc = lambda_half(kernel, laws, ExpectationMode::nested_mc(20000, 5));
    CHECK_FALSE(mc.exact);
    CHECK(std::abs(mc.value - exact) < 4.0 * mc.se + 1e-3 * exact);
}

TEST_CASE("power iteration agrees with the dense decomposition") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const int n = 3 + static_cast<int>(seed % 3);
        const auto laws = random_finite_laws(n, seed);
        const auto kernel = random_pair_kernel(n, seed);
        const auto result = operator_norm(kernel, laws);
        REQUIRE(result.dense_checked);
        CHECK(std::abs(result.value - result.dense_value) <=
              1e-8 * std::max(1.0, result.dense_value));
    }
}

TEST_CASE("operator norm never exceeds lambda_half") {
    for (std::uint64_t seed = 20; seed < 30; ++seed) {
        const int n = 3 + static_cast<int>(seed % 4);
        const auto laws = random_finite_laws(n, seed);
        const auto kernel = random_pair_kernel(n, seed);
        const double l1 = operator_norm(kernel, laws).value;
        const double lhalf = lambda_half(kernel, laws).value;
        CHECK(l1 <= lhalf * (1.0 + 1e-9));
    }
}

TEST_CASE("restricted operator norm lower-bounds the full one") {
    const int n = 4;
    const auto laws = random_finite_laws(n, 12);
    const auto kernel = random_pair_kernel(n, 12);
    const double full = operator_norm(kernel, laws).value;
    std::vector<std::vector<std::function<double(std::span<const double>)>>> basis(
        static_cast<std::size_t>(n));
    for (auto& fns : basis)
        fns.push_back([](std::span<const double> z) { return z[0]; });
    const double restricted =
        operator_norm_restricted(kernel, laws, basis, ExpectationMode::exact()).value;
    CHECK(restricted <= full * (1.0 + 1e-9));
}

TEST_CASE("lambda_alpha_beta symmetry and trivial upper bound") {
    const int n = 4;
    const auto laws = random_finite_laws(n, 8);
    // symmetric kernel: the alpha and beta quantities coincide
    const auto kernel = KernelFamily::generic(
        [](int, int, std::span<const double> a, std::span<const double> b) {
            return a[0] * b[0] + 0.5 * a[0] * a[0] * b[0] * b[0];
        },
        true);
    const auto r = lambda_alpha_beta(kernel, laws, 2.0, 2.0);
    CHECK(r.lambda_alpha == doctest::Approx(r.lambda_beta).epsilon(1e-9));
    CHECK(r.lambda_alpha <= r.trivial_upper_alpha * (1.0 + 1e-9));
    CHECK(r.k_f > 0.0);
}

TEST_CASE("structured lambda_2 equals its closed form") {
    FiniteSupport x;
    x.atoms = {{-1.0}, {1.0}};
    x.probs = {0.5, 0.5};
    std::vector<ConditionalLaw> y{ConditionalLaw::finite({-1.0, 1.0}, {0.5, 0.5}),
                                  ConditionalLaw::finite({-1.0, 1.0}, {0.5, 0.5})};
    const int n = 6;
    const std::vector<DistributionSpec> laws(n, DistributionSpec::product_xy(x, y));
    const auto point = [](int, std::span<const double> z) { return z[1]; };
    const auto w = [](int, int, std::span<const double> a, std::span<const double> b) {
        return 0.5 * a[0] * b[0];
    };
    const auto kernel = KernelFamily::structured(point, w, point, 0.5, 1);
    const double alpha = 2.0, beta = 2.0;
    const auto [c_phi, c_psi] = conditional_psi_bound(kernel, laws, alpha, beta);
    const auto prof = structured_lambdas(kernel, laws, c_phi, c_psi, alpha, beta);
    const double expect =
        c_phi * c_psi * 0.5 * std::pow(log_n(n), 1.0 / alpha + 1.0 / beta);
    CHECK(prof.lambda_2 == doctest::Approx(expect).epsilon(1e-9));
    CHECK(prof.lambda_alpha_star ==
          doctest::Approx(std::sqrt(log_n(n)) * prof.lambda_32_alpha +
                          log_n(n) * prof.lambda_2)
              .epsilon(1e-9));
    CHECK(prof.lambda_32_alpha == doctest::Approx(prof.lambda_32_beta).epsilon(1e-9));
}
