#include "ustat/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "ustat/reduce.hpp"
#include "ustat/rng.hpp"

namespace ustat {

void SimulationPlan::validate() const {
    if (n < 2 || static_cast<int>(laws.size()) != n)
        throw std::invalid_argument("plan: need n >= 2 laws matching n");
    if (replications < 1) throw std::invalid_argument("plan: replications must be >= 1");
    if (tail_plan && replications < 1000)
        throw std::invalid_argument("plan: tail plans need >= 1000 replications");
    for (std::size_t k = 0; k + 1 < t_grid.size(); ++k)
        if (!(t_grid[k] < t_grid[k + 1]))
            throw std::invalid_argument("plan: t grid must be strictly increasing");
    if (statistic == StatisticKind::SupProcess && !has_class)
        throw std::invalid_argument("plan: sup-process statistic needs a kernel class");
    for (const auto& law : laws) law.validate();
}

namespace {

std::vector<double> draw_signs(std::uint64_t seed, std::uint64_t tag,
                               std::uint64_t rep, int n) {
    auto s = rng::Stream::derive(seed, {tag, rep});
    std::vector<double> e(static_cast<std::size_t>(n));
    for (auto& v : e) v = s.rademacher();
    return e;
}

// sum_i u_i (row_i . v) over a zero-diagonal coefficient matrix; the
// tree-reduced outer sum keeps the result worker-independent.
double matrix_bilinear(const KernelFamily& k, std::span<const double> u,
                       std::span<const double> v) {
    const std::size_t n = static_cast<std::size_t>(k.matrix_n);
    if (u.size() != n || v.size() != n)
        throw std::invalid_argument("matrix kernel: sample count mismatch");
    const double* a = k.matrix.data();
    return reduce::pairwise(0, n, [&](std::size_t i) {
        const double* row = a + i * n;
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * v[j];
        return u[i] * s;
    });
}

std::vector<double> signed_column(const SampleBatch& b,
                                  const std::vector<double>* signs) {
    std::vector<double> out(static_cast<std::size_t>(b.n));
    for (int i = 0; i < b.n; ++i)
        out[static_cast<std::size_t>(i)] =
            b.row(i)[0] * (signs ? (*signs)[static_cast<std::size_t>(i)] : 1.0);
    return out;
}

double eval_one(const SimulationPlan& plan, std::uint64_t r) {
    const bool matrix = plan.statistic != StatisticKind::SupProcess &&
                        plan.kernel.form == KernelFamily::Form::Matrix;
    const SampleBatch z = sample_batch(plan.laws, plan.seed, r, kStreamZ);
    switch (plan.statistic) {
        case StatisticKind::DegenerateUstat: {
            if (matrix) {
                const auto u = signed_column(z, nullptr);
                return matrix_bilinear(plan.kernel, u, u);
            }
            UStatOptions opts;
            opts.parallel = false;
            return evaluate_ustat(plan.kernel, z, nullptr, opts);
        }
        case StatisticKind::Decoupled: {
            const SampleBatch zp = sample_batch(plan.laws, plan.seed, r, kStreamZPrime);
            if (matrix)
                return matrix_bilinear(plan.kernel, signed_column(z, nullptr),
                                       signed_column(zp, nullptr));
            UStatOptions opts;
            opts.parallel = false;
            return evaluate_ustat(plan.kernel, z, &zp, opts);
        }
        case StatisticKind::Symmetrized: {
            const SampleBatch zp = sample_batch(plan.laws, plan.seed, r, kStreamZPrime);
            const auto eps = draw_signs(plan.seed, kStreamEps, r, plan.n);
            const auto epsp = draw_signs(plan.seed, kStreamEpsPrime, r, plan.n);
            if (matrix)
                return matrix_bilinear(plan.kernel, signed_column(z, &eps),
                                       signed_column(zp, &epsp));
            return evaluate_ustat_signed(plan.kernel, z, zp, eps, epsp, false);
        }
        case StatisticKind::SupProcess: {
            const SampleBatch zp = sample_batch(plan.laws, plan.seed, r, kStreamZPrime);
            const auto eps = draw_signs(plan.seed, kStreamEps, r, plan.n);
            const auto epsp = draw_signs(plan.seed, kStreamEpsPrime, r, plan.n);
            return sup_ustat(plan.cls, z, zp, eps, epsp, false).value;
        }
    }
    throw std::logic_error("plan: unknown statistic kind");
}

SimulationReport assemble(std::vector<double> samples, std::vector<double> t_grid,
                          bool envelope_units, std::uint64_t seed,
                          std::int64_t workers) {
    SimulationReport rep;
    rep.count = static_cast<std::int64_t>(samples.size());
    rep.seed = seed;
    rep.workers_used = workers;
    rep.t_grid = std::move(t_grid);
    rep.grid_in_envelope_units = envelope_units;
    const auto r = static_cast<double>(rep.count);

    rep.mean = reduce::pairwise_sum(samples) / r;
    std::vector<double> work(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double d = samples[k] - rep.mean;
        work[k] = d * d;
    }
    rep.variance = rep.count > 1 ? reduce::pairwise_sum(work) / (r - 1.0) : 0.0;
    for (int p = 1; p <= 4; ++p) {
        for (std::size_t k = 0; k < samples.size(); ++k)
            work[k] = std::pow(std::abs(samples[k]), p);
        rep.abs_moments[static_cast<std::size_t>(p - 1)] =
            reduce::pairwise_sum(work) / r;
    }

    rep.sorted_abs.resize(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k)
        rep.sorted_abs[k] = std::abs(samples[k]);
    std::sort(rep.sorted_abs.begin(), rep.sorted_abs.end());

    if (!envelope_units) {
        for (double t : rep.t_grid) {
            TailRow row;
            row.t = t;
            row.threshold = t;
            const auto it = std::lower_bound(rep.sorted_abs.begin(),
                                             rep.sorted_abs.end(), t);
            row.count = static_cast<std::int64_t>(rep.sorted_abs.end() - it);
            row.estimate = static_cast<double>(row.count) / r;
            row.ci = clopper_pearson(row.count, rep.count, 0.99);
            rep.tail.push_back(row);
        }
    }
    return rep;
}

}  // namespace

SimulationReport run(const SimulationPlan& plan) {
    plan.validate();
    const int workers = plan.workers > 0 ? plan.workers : reduce::max_workers();
    const auto r_total = plan.replications;
    std::vector<double> samples(static_cast<std::size_t>(r_total));
    std::atomic<std::int64_t> first_bad{r_total};

#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t r = 0; r < r_total; ++r) {
        double v;
        try {
            v = eval_one(plan, static_cast<std::uint64_t>(r));
        } catch (...) {
            v = std::numeric_limits<double>::quiet_NaN();
        }
        samples[static_cast<std::size_t>(r)] = v;
        if (!std::isfinite(v)) {
            std::int64_t cur = first_bad.load();
            while (r < cur && !first_bad.compare_exchange_weak(cur, r)) {
            }
        }
    }
    if (first_bad.load() < r_total)
        throw std::runtime_error("simulation: non-finite statistic at replication " +
                                 std::to_string(first_bad.load()));
    return assemble(std::move(samples), plan.t_grid, plan.grid_in_envelope_units,
                    plan.seed, workers);
}

SimulationReport report_from_samples(std::vector<double> samples,
                                     std::vector<double> t_grid,
                                     std::uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("report: no samples");
    for (double v : samples)
        if (!std::isfinite(v)) throw std::invalid_argument("report: non-finite sample");
    for (std::size_t k = 0; k + 1 < t_grid.size(); ++k)
        if (!(t_grid[k] < t_grid[k + 1]))
            throw std::invalid_argument("report: t grid must be strictly increasing");
    return assemble(std::move(samples), std::move(t_grid), false, seed, 1);
}

EnvelopeAudit envelope_audit(const SimulationReport& report,
                             const TailEnvelope& envelope) {
    if (!report.grid_in_envelope_units)
        throw std::invalid_argument("audit: report grid is not in envelope units");
    if (report.count < 1000)
        throw std::invalid_argument("audit: need >= 1000 replications");
    EnvelopeAudit audit;
    const auto r = static_cast<double>(report.count);
    for (double t : report.t_grid) {
        AuditRow row;
        row.t = t;
        row.threshold = envelope.evaluate(t).value;
        const auto it = std::lower_bound(report.sorted_abs.begin(),
                                         report.sorted_abs.end(), row.threshold);
        row.count = static_cast<std::int64_t>(report.sorted_abs.end() - it);
        row.estimate = static_cast<double>(row.count) / r;
        row.ci = clopper_pearson(row.count, report.count, 0.99);
        row.budget = 2.0 * std::exp(-t);
        row.violation = row.ci.lo > row.budget;
        audit.any_violation = audit.any_violation || row.violation;
        audit.rows.push_back(row);
    }
    try {
        audit.fitted_k =
            fit_tail_constant(envelope, report.sorted_abs, report.t_grid);
        audit.fit_finite = true;
    } catch (const std::runtime_error&) {
        audit.fitted_k = std::numeric_limits<double>::infinity();
        audit.fit_finite = false;
    }
    return audit;
}

RegimeEstimate regime_slope(const SimulationReport& report, double q_lo,
                            double q_hi, int bootstrap) {
    if (!(0.0 <= q_lo && q_lo < q_hi && q_hi <= 1.0))
        throw std::invalid_argument("regime slope: bad quantile window");
    const auto& sa = report.sorted_abs;
    const auto r_count = report.count;
    if (r_count < 100) throw std::invalid_argument("regime slope: too few samples");
    const auto quantile = [&](double q) {
        const auto idx = static_cast<std::size_t>(
            std::min<double>(static_cast<double>(r_count - 1),
                             q * static_cast<double>(r_count - 1)));
        return sa[idx];
    };

    // threshold grid: interior quantiles of the window, deduplicated
    constexpr int kProbes = 40;
    std::vector<double> thresholds;
    for (int k = 0; k < kProbes; ++k) {
        const double q = q_lo + (q_hi - q_lo) * (k + 0.5) / kProbes;
        const double thr = quantile(q);
        if (thr > 0.0 && (thresholds.empty() || thr > thresholds.back()))
            thresholds.push_back(thr);
    }

    const auto count_at = [&](double thr) {
        const auto it = std::lower_bound(sa.begin(), sa.end(), thr);
        return static_cast<std::int64_t>(sa.end() - it);
    };
    const auto fit_points = [&](const std::vector<std::int64_t>& counts) {
        std::vector<double> x, y;
        for (std::size_t k = 0; k < thresholds.size(); ++k) {
            if (counts[k] <= 0 || counts[k] >= r_count) continue;
            const double p = static_cast<double>(counts[k]) /
                             static_cast<double>(r_count);
            x.push_back(std::log(thresholds[k]));
            y.push_back(std::log(-std::log(p)));
        }
        return std::pair{x, y};
    };

    std::vector<std::int64_t> counts(thresholds.size());
    for (std::size_t k = 0; k < thresholds.size(); ++k)
        counts[k] = count_at(thresholds[k]);
    auto [x, y] = fit_points(counts);
    if (x.size() < 20)
        throw std::runtime_error("regime slope: insufficient nonzero tail mass in window");

    RegimeEstimate est;
    est.points = static_cast<int>(x.size());
    est.slope = least_squares(x, y).slope;

    // multinomial bootstrap over the bins cut by the thresholds
    const std::size_t m = thresholds.size();
    std::vector<double> cdf(m + 1);  // bin k: mass below threshold k (bin m: top)
    for (std::size_t k = 0; k < m; ++k)
        cdf[k] = static_cast<double>(r_count - counts[k]) /
                 static_cast<double>(r_count);
    cdf[m] = 1.0;
    std::vector<double> slopes;
    for (int b = 0; b < bootstrap; ++b) {
        auto s = rng::Stream::derive(report.seed, {0x62736c70ULL,
                                                   static_cast<std::uint64_t>(b)});
        std::vector<std::int64_t> bin(m + 1, 0);
        for (std::int64_t k = 0; k < r_count; ++k) {
            const double u = s.uniform();
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            const auto idx = std::min<std::size_t>(
                static_cast<std::size_t>(it - cdf.begin()), m);
            ++bin[idx];
        }
        // counts above threshold k = bins k+1..m, accumulated from the top
        std::vector<std::int64_t> bc(m);
        std::int64_t acc = 0;
        for (std::size_t k = m; k-- > 0;) {
            acc += bin[k + 1];
            bc[k] = acc;
        }
        auto [bx, by] = fit_points(bc);
        if (bx.size() >= 2) slopes.push_back(least_squares(bx, by).slope);
    }
    if (slopes.size() >= 2) {
        double mu = 0.0;
        for (double v : slopes) mu += v;
        mu /= static_cast<double>(slopes.size());
        double ss = 0.0;
        for (double v : slopes) ss += (v - mu) * (v - mu);
        est.se = std::sqrt(ss / static_cast<double>(slopes.size() - 1));
    }
    return est;
}

void write_report_jsonl(const SimulationReport& report, std::ostream& out) {
    nlohmann::ordered_json summary{
        {"record", "summary"},
        {"count", report.count},
        {"mean", report.mean},
        {"variance", report.variance},
        {"abs_moment_p1", report.abs_moments[0]},
        {"abs_moment_p2", report.abs_moments[1]},
        {"abs_moment_p3", report.abs_moments[2]},
        {"abs_moment_p4", report.abs_moments[3]},
        {"seed", report.seed},
        {"grid_units", report.grid_in_envelope_units ? "envelope" : "absolute"},
    };
    out << summary.dump() << "\n";
    for (const auto& row : report.tail) {
        nlohmann::ordered_json j{
            {"record", "tail"},   {"t", row.t},
            {"threshold", row.threshold}, {"count", row.count},
            {"estimate", row.estimate},   {"ci_lo", row.ci.lo},
            {"ci_hi", row.ci.hi},
        };
        out << j.dump() << "\n";
    }
}

void write_tail_csv(const SimulationReport& report, std::ostream& out) {
    out << "t,threshold,count,estimate,ci_lo,ci_hi\r\n";
    out.precision(17);
    for (const auto& row : report.tail)
        out << row.t << ',' << row.threshold << ',' << row.count << ','
            << row.estimate << ',' << row.ci.lo << ',' << row.ci.hi << "\r\n";
}

}  // namespace ustat
