#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "ustat/montecarlo.hpp"

using namespace ustat;

namespace {

SimulationPlan base_plan(int n, std::int64_t reps, std::uint64_t seed) {
    SimulationPlan plan;
    plan.laws.assign(static_cast<std::size_t>(n), DistributionSpec::rademacher());
    plan.n = n;
    plan.replications = reps;
    plan.seed = seed;
    plan.tail_plan = false;
    return plan;
}

KernelFamily offdiag_ones(int n) {
    std::vector<double> a(static_cast<std::size_t>(n) * n, 1.0);
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + i] = 0.0;
    return KernelFamily::from_matrix(std::move(a), n);
}

}  // namespace

TEST_CASE("zero kernel produces an all-zero report") {
    auto plan = base_plan(4, 2000, 1);
    plan.kernel = KernelFamily::generic(
        [](int, int, std::span<const double>, std::span<const double>) { return 0.0; },
        true);
    plan.t_grid = {0.5, 1.0, 2.0};
    plan.statistic = StatisticKind::Symmetrized;
    const auto report = run(plan);
    CHECK(report.mean == 0.0);
    CHECK(report.variance == 0.0);
    for (const auto& row : report.tail) {
        CHECK(row.count == 0);
        CHECK(row.estimate == 0.0);
    }
}

TEST_CASE("two-point chaos tail is exactly resolved") {
    auto plan = base_plan(2, 4000, 3);
    plan.kernel = offdiag_ones(2);  // statistic 2 z1 z2, |U| = 2 always
    plan.t_grid = {1.0, 2.0, 2.5};
    plan.statistic = StatisticKind::DegenerateUstat;
    const auto report = run(plan);
    CHECK(report.tail[0].estimate == 1.0);
    CHECK(report.tail[1].estimate == 1.0);
    CHECK(report.tail[2].estimate == 0.0);
    CHECK(report.abs_moments[0] == doctest::Approx(2.0));
}

TEST_CASE("reports are identical across worker counts") {
    auto plan = base_plan(6, 3000, 9);
    plan.kernel = offdiag_ones(6);
    plan.statistic = StatisticKind::Symmetrized;
    plan.t_grid = {1.0, 4.0};
    plan.workers = 1;
    const auto one = run(plan);
    plan.workers = 4;
    const auto four = run(plan);
    CHECK(one.mean == four.mean);
    CHECK(one.variance == four.variance);
    CHECK(one.sorted_abs == four.sorted_abs);
    CHECK(one.abs_moments == four.abs_moments);
}

TEST_CASE("matrix fast path agrees with the generic kernel path") {
    const int n = 5;
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    auto s = rng::Stream::derive(11, {1});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) a[static_cast<std::size_t>(i) * n + j] = 2 * s.uniform() - 1;
    auto fast = base_plan(n, 500, 21);
    fast.kernel = KernelFamily::from_matrix(a, n);
    fast.statistic = StatisticKind::Symmetrized;
    auto slow = fast;
    auto coeffs = a;
    slow.kernel = KernelFamily::generic(
        [coeffs, n](int i, int j, std::span<const double> zi,
                    std::span<const double> zj) {
            return coeffs[static_cast<std::size_t>(i) * n + j] * zi[0] * zj[0];
        });
    const auto rf = run(fast);
    const auto rs = run(slow);
    CHECK(rf.mean == doctest::Approx(rs.mean).epsilon(1e-12));
    for (std::size_t k = 0; k < rf.sorted_abs.size(); ++k)
        CHECK(rf.sorted_abs[k] == doctest::Approx(rs.sorted_abs[k]).epsilon(1e-12));
}

TEST_CASE("non-finite statistics abort with the replication index") {
    auto plan = base_plan(2, 10, 0);
    plan.kernel = KernelFamily::generic(
        [](int, int, std::span<const double>, std::span<const double>) {
            return std::numeric_limits<double>::quiet_NaN();
        });
    CHECK_THROWS_AS(run(plan), std::runtime_error);
}

TEST_CASE("report_from_samples computes exact summaries") {
    const auto report = report_from_samples({1.0, -2.0, 3.0, 0.0}, {0.5, 2.5}, 4);
    CHECK(report.mean == doctest::Approx(0.5));
    CHECK(report.abs_moments[0] == doctest::Approx(1.5));
    CHECK(report.abs_moments[1] == doctest::Approx(3.5));
    CHECK(report.tail[0].count == 3);
    CHECK(report.tail[1].count == 1);
    CHECK(report.tail[0].ci.lo <= report.tail[0].estimate);
    CHECK(report.tail[0].ci.hi >= report.tail[0].estimate);
}

TEST_CASE("tail estimates are nonincreasing in t") {
    auto plan = base_plan(6, 5000, 13);
    plan.kernel = offdiag_ones(6);
    plan.statistic = StatisticKind::Symmetrized;
    plan.t_grid = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    const auto report = run(plan);
    for (std::size_t k = 1; k < report.tail.size(); ++k)
        CHECK(report.tail[k].estimate <= report.tail[k - 1].estimate);
}

TEST_CASE("envelope audit flags impossible envelopes and passes honest ones") {
    auto plan = base_plan(4, 2000, 17);
    plan.kernel = offdiag_ones(4);
    plan.statistic = StatisticKind::Symmetrized;
    plan.t_grid = {1.0, 2.0, 3.0};
    plan.grid_in_envelope_units = true;
    const auto report = run(plan);

    TailEnvelope zero_env;  // all lambdas zero but the statistic is not
    zero_env.profile.set_orders(1.0, 1.0);
    const auto bad = envelope_audit(report, zero_env);
    CHECK(bad.any_violation);
    CHECK_FALSE(bad.fit_finite);

    TailEnvelope wide;  // generous scale: thresholds beyond the bounded support
    wide.profile.set_orders(1.0, 1.0);
    wide.profile.lambda_one = 100.0;
    const auto good = envelope_audit(report, wide);
    CHECK_FALSE(good.any_violation);
    CHECK(good.fit_finite);

    auto absolute = report;
    absolute.grid_in_envelope_units = false;
    CHECK_THROWS(envelope_audit(absolute, wide));
}

TEST_CASE("regime slope recovers synthetic exponents") {
    const std::size_t r = 50000;
    std::vector<double> expo(r), gauss(r);
    for (std::size_t k = 0; k < r; ++k) {
        const double u = (static_cast<double>(k) + 0.5) / r;
        expo[k] = -std::log(u);
        gauss[k] = std::sqrt(-std::log(u));
    }
    const auto re = regime_slope(report_from_samples(expo, {}, 1), 0.9, 1.0, 50);
    CHECK(re.slope == doctest::Approx(1.0).epsilon(0.05));
    const auto rg = regime_slope(report_from_samples(gauss, {}, 2), 0.9, 1.0, 50);
    CHECK(rg.slope == doctest::Approx(2.0).epsilon(0.05));
    CHECK(re.se < 0.2);
}

TEST_CASE("writers emit the declared formats") {
    const auto report = report_from_samples({1.0, -1.0, 2.0, -2.0}, {1.5}, 0);
    std::ostringstream jout;
    write_report_jsonl(report, jout);
    const auto jtext = jout.str();
    CHECK(jtext.find("\"record\":\"summary\"") != std::string::npos);
    CHECK(jtext.find("\"record\":\"tail\"") != std::string::npos);
    std::ostringstream csv;
    write_tail_csv(report, csv);
    const auto ctext = csv.str();
    CHECK(ctext.rfind("t,threshold,count,estimate,ci_lo,ci_hi\r\n", 0) == 0);
    CHECK(ctext.find("\r\n1.5,") != std::string::npos);
}
