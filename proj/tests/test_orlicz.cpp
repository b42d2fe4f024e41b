#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ustat/orlicz.hpp"

using namespace ustat;

TEST_CASE("constant variable at alpha 1 has norm 1/ln 2") {
    const auto law = ScalarLaw::finite({1.0}, {1.0});
    const auto est = psi_norm(law, 1.0);
    CHECK(est.value == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-6));
    CHECK(est.mode == PsiNormEstimate::Mode::ExactFinite);
}

TEST_CASE("rademacher at alpha 2 has norm 1/sqrt(ln 2)") {
    const auto est = psi_norm(DistributionSpec::rademacher(), 2.0);
    CHECK(est.value ==
          doctest::Approx(1.0 / std::sqrt(std::log(2.0))).epsilon(1e-6));
}

TEST_CASE("standard normal at alpha 2 has norm sqrt(8/3)") {
    const auto est = psi_norm(DistributionSpec::gaussian(0.0, 1.0), 2.0);
    CHECK(est.value == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-6));
    CHECK(est.mode == PsiNormEstimate::Mode::Quadrature);
}

TEST_CASE("psi norm is homogeneous") {
    const auto law = ScalarLaw::finite({0.3, -1.7, 2.2}, {0.2, 0.5, 0.3});
    for (double alpha : {0.5, 1.0, 2.0}) {
        const double base = psi_norm(law, alpha).value;
        for (double c : {0.1, 3.0, 250.0}) {
            auto scaled = law;
            for (auto& v : scaled.values) v *= c;
            CHECK(psi_norm(scaled, alpha).value ==
                  doctest::Approx(c * base).epsilon(1e-5));
        }
    }
}

TEST_CASE("bisection bracket certifies the norm") {
    const auto law = ScalarLaw::finite({1.0, -2.0, 0.25}, {0.5, 0.25, 0.25});
    for (double alpha : {0.5, 1.0, 2.0}) {
        const auto est = psi_norm(law, alpha);
        CHECK(psi_moment(law, alpha, est.hi) <= 2.0 * (1.0 + 1e-9));
        CHECK(psi_moment(law, alpha, est.lo) >= 2.0 * (1.0 - 1e-9));
        CHECK(est.lo <= est.value);
        CHECK(est.value <= est.hi);
    }
}

TEST_CASE("zero variable is flagged with norm 0") {
    const auto est = psi_norm(ScalarLaw::finite({0.0}, {1.0}), 1.0);
    CHECK(est.zero);
    CHECK(est.value == 0.0);
}

TEST_CASE("tail bound holds at the fitted norm") {
    const auto law = DistributionSpec::finite_scalar({-3.0, 0.5, 1.0, 4.0},
                                                     {0.1, 0.4, 0.3, 0.2});
    for (double alpha : {0.5, 1.0, 2.0}) {
        const auto est = psi_norm(law, alpha);
        const auto report = psi_tail_check(est, law);
        CHECK(report.pass);
        CHECK(report.worst_ratio <= 1.0 + 1e-9);
    }
}

TEST_CASE("empirical norm approaches the exact one") {
    // samples exactly realizing the {-1, 1} half-half law
    std::vector<double> xs(1000);
    for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = k % 2 ? 1.0 : -1.0;
    const auto emp = psi_norm_empirical(xs, 2.0);
    CHECK(emp.mode == PsiNormEstimate::Mode::Empirical);
    CHECK(emp.value ==
          doctest::Approx(1.0 / std::sqrt(std::log(2.0))).epsilon(1e-5));
}

TEST_CASE("conditional psi bounds over a product law") {
    FiniteSupport x;
    x.atoms = {{0.0}, {1.0}};
    x.probs = {0.5, 0.5};
    std::vector<ConditionalLaw> y{ConditionalLaw::finite({-1.0, 1.0}, {0.5, 0.5}),
                                  ConditionalLaw::finite({-2.0, 2.0}, {0.5, 0.5})};
    const std::vector<DistributionSpec> laws(3, DistributionSpec::product_xy(x, y));
    const auto phi = [](int, std::span<const double> z) { return z[1]; };
    const auto w = [](int, int, std::span<const double>, std::span<const double>) {
        return 1.0;
    };
    const auto kernel = KernelFamily::structured(phi, w, phi, 1.0, 1);
    const auto [c_phi, c_psi] = conditional_psi_bound(kernel, laws, 2.0, 2.0);
    // worst X atom carries a +/-2 sign variable
    CHECK(c_phi == doctest::Approx(2.0 / std::sqrt(std::log(2.0))).epsilon(1e-5));
    CHECK(c_psi == doctest::Approx(c_phi).epsilon(1e-9));
}
