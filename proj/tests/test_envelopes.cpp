#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ustat/envelopes.hpp"
#include "ustat/rng.hpp"

using namespace ustat;

namespace {

LambdaProfile unit_profile(double alpha, double beta, int n) {
    LambdaProfile p;
    p.set_orders(alpha, beta);
    p.n = n;
    p.lambda_half = p.lambda_one = p.lambda_alpha = p.lambda_beta = 1.0;
    p.lambda_2 = p.lambda_32_alpha = p.lambda_32_beta = 1.0;
    p.lambda_alpha_star = p.lambda_beta_star = 1.0;
    p.k_f = p.k_g = 1.0;
    return p;
}

}  // namespace

TEST_CASE("moment envelope unit check: 38 at alpha=beta=2, p=4, log n = 1") {
    const auto b = moment_envelope_bound(unit_profile(2.0, 2.0, 2), 4.0);
    REQUIRE(b.terms.size() == 5);
    CHECK(b.terms[0] == doctest::Approx(2.0));
    CHECK(b.terms[1] == doctest::Approx(4.0));
    CHECK(b.terms[2] == doctest::Approx(8.0));
    CHECK(b.terms[3] == doctest::Approx(8.0));
    CHECK(b.terms[4] == doctest::Approx(16.0));
    CHECK(b.value == doctest::Approx(38.0));
    CHECK(b.regime == 4);
    CHECK_THROWS(moment_envelope_bound(unit_profile(2, 2, 2), 0.5));
}

TEST_CASE("literal reading swaps the weighted constant in the log term") {
    auto prof = unit_profile(2.0, 2.0, 2);
    prof.lambda_alpha = 3.0;
    prof.lambda_beta = 5.0;
    const auto primary = moment_envelope_bound(prof, 2.0, {}, false);
    const auto literal = moment_envelope_bound(prof, 2.0, {}, true);
    CHECK(literal.terms[3] / primary.terms[3] == doctest::Approx(5.0 / 3.0));
    CHECK(literal.terms[2] == primary.terms[2]);
}

TEST_CASE("tail envelope unit check: 46 at alpha=beta=1, t=4") {
    TailEnvelope env;
    env.profile = unit_profile(1.0, 1.0, 2);
    const auto b = env.evaluate(4.0);
    REQUIRE(b.terms.size() == 7);
    CHECK(b.value == doctest::Approx(46.0));
    CHECK(env.evaluate(0.0).value == 0.0);
    CHECK_THROWS(env.evaluate(-1.0));
}

TEST_CASE("strict exponent only changes the beta 3/2 term") {
    TailEnvelope env;
    env.profile = unit_profile(1.0, 0.5, 2);
    const auto loose = env.evaluate(3.0);
    env.strict_exponent = true;
    const auto strict = env.evaluate(3.0);
    // 1/2 + 1/beta* = 2.5 versus 1/2 + beta* = 1.0
    CHECK(loose.terms[5] == doctest::Approx(std::pow(3.0, 2.5)));
    CHECK(strict.terms[5] == doctest::Approx(3.0));
    for (std::size_t k : {0u, 1u, 2u, 3u, 4u, 6u})
        CHECK(loose.terms[k] == strict.terms[k]);
}

TEST_CASE("u-process envelope unit check: 13 at alpha=beta=1, p=1, log n = 1") {
    Thm31Terms terms;
    terms.e_u1 = terms.w_n1 = terms.w_n2 = terms.op_norm = 1.0;
    terms.e_n1 = terms.e_n2 = terms.sigma_n1 = terms.sigma_n2 = terms.lambda_2 = 1.0;
    // substituting ones: 1 + 2 + 1 + 3 + 3 + 1 + 1 + 1 = 13
    const auto b = uprocess_envelope(terms, 1.0, 1.0, 1.0, 2);
    CHECK(b.value == doctest::Approx(13.0));
}

TEST_CASE("tail constant fit brackets an exponential sample") {
    // |U| = -ln(u) on a deterministic grid: P(|U| >= t) ~ exp(-t) <= 2 exp(-t)
    const std::size_t r = 100000;
    std::vector<double> abs_sorted(r);
    for (std::size_t k = 0; k < r; ++k)
        abs_sorted[k] = -std::log((static_cast<double>(r - k) - 0.5) / r);
    TailEnvelope env;
    env.profile.set_orders(1.0, 1.0);
    env.profile.n = 2;
    env.profile.lambda_one = 1.0;  // T(t) = t
    const std::vector<double> grid{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const double k1 = fit_tail_constant(env, abs_sorted, grid);
    CHECK(k1 > 0.3);
    CHECK(k1 <= 1.05);
    for (auto& v : abs_sorted) v *= 2.0;
    const double k2 = fit_tail_constant(env, abs_sorted, grid);
    CHECK(k2 / k1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("tail constant fit refuses impossible envelopes") {
    std::vector<double> abs_sorted(2000, 1.0);
    TailEnvelope env;  // all lambdas zero: T(t) = 0 but the sample is not
    env.profile.set_orders(1.0, 1.0);
    const std::vector<double> grid{1.0, 2.0};
    CHECK_THROWS_AS(fit_tail_constant(env, abs_sorted, grid), std::runtime_error);
    const std::vector<double> zeros(2000, 0.0);
    CHECK(fit_tail_constant(env, zeros, grid) > 0.0);  // degenerate data passes
}

TEST_CASE("sum moment inequality holds and rejects off-center laws") {
    auto s = rng::Stream::derive(31, {1});
    for (int inst = 0; inst < 20; ++inst) {
        std::vector<DistributionSpec> laws;
        const int n = 2 + inst % 3;
        for (int i = 0; i < n; ++i) {
            const double a = 0.5 + s.uniform();
            const double p = 0.2 + 0.6 * s.uniform();
            // mean-zero two-point law: a with prob p, -ap/(1-p) with prob 1-p
            laws.push_back(DistributionSpec::finite_scalar(
                {a, -a * p / (1 - p)}, {p, 1 - p}));
        }
        for (double p : {1.0, 2.0, 3.0, 4.0}) {
            const auto rep = sum_moment_lemma(laws, p);
            CHECK(rep.pass);
        }
    }
    const std::vector<DistributionSpec> bad{
        DistributionSpec::finite_scalar({1.0, 2.0}, {0.5, 0.5}),
        DistributionSpec::rademacher()};
    CHECK_THROWS(sum_moment_lemma(bad, 2.0));
}

TEST_CASE("max moment inequality holds on random nonnegative instances") {
    auto s = rng::Stream::derive(37, {2});
    for (int inst = 0; inst < 20; ++inst) {
        std::vector<DistributionSpec> laws;
        const int n = 2 + inst % 3;
        for (int i = 0; i < n; ++i)
            laws.push_back(DistributionSpec::finite_scalar(
                {3 * s.uniform(), 3 * s.uniform()}, {0.5, 0.5}));
        for (double p : {1.0, 2.0, 3.0, 4.0})
            for (double alpha : {0.5, 1.0, 2.0}) {
                const auto rep = max_moment_lemma(laws, p, alpha);
                CHECK(rep.pass);
            }
    }
}
