// Acceptance harness: one criterion per function, one PASS/FAIL line each.
// Returns nonzero if any criterion fails. Hardware-relative subchecks that
// cannot run on this machine are reported as SKIPPED inside their line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "ustat/constants.hpp"
#include "ustat/envelopes.hpp"
#include "ustat/hoeffding.hpp"
#include "ustat/montecarlo.hpp"
#include "ustat/orlicz.hpp"
#include "ustat/resampling.hpp"
#include "ustat/uprocess.hpp"

using namespace ustat;

namespace {

double now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::vector<DistributionSpec> random_laws(int n, int max_support,
                                          rng::Stream& s) {
    std::vector<DistributionSpec> laws;
    for (int i = 0; i < n; ++i) {
        const int m = 2 + static_cast<int>(s.next_u64() % (max_support - 1));
        std::vector<double> atoms, probs;
        double total = 0.0;
        for (int a = 0; a < m; ++a) {
            atoms.push_back(2.0 * s.uniform() - 1.0);
            probs.push_back(0.1 + s.uniform());
            total += probs.back();
        }
        for (auto& p : probs) p /= total;
        laws.push_back(DistributionSpec::finite_scalar(atoms, probs));
    }
    return laws;
}

KernelFamily random_poly_kernel(int n, rng::Stream& s) {
    auto coef = std::make_shared<std::vector<double>>(
        static_cast<std::size_t>(n) * n * 9);
    for (auto& c : *coef) c = 2.0 * s.uniform() - 1.0;
    return KernelFamily::generic(
        [coef, n](int i, int j, std::span<const double> zi,
                  std::span<const double> zj) {
            const double* c = coef->data() + (static_cast<std::size_t>(i) * n + j) * 9;
            const double x = zi[0], y = zj[0];
            double v = 0.0;
            int k = 0;
            for (int p = 0; p < 3; ++p) {
                double xp = p == 0 ? 1.0 : (p == 1 ? x : x * x);
                for (int q = 0; q < 3; ++q) {
                    double yq = q == 0 ? 1.0 : (q == 1 ? y : y * y);
                    v += c[k++] * xp * yq;
                }
            }
            return v;
        });
}

KernelFamily offdiag_ones(int n) {
    std::vector<double> a(static_cast<std::size_t>(n) * n, 1.0);
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + i] = 0.0;
    return KernelFamily::from_matrix(std::move(a), n);
}

struct Corpus {
    std::vector<std::vector<DistributionSpec>> laws;
    std::vector<KernelFamily> kernels;
    std::vector<HoeffdingSplit> splits;
};

Corpus make_corpus(int count, std::uint64_t seed) {
    Corpus c;
    auto s = rng::Stream::derive(seed, {0x636f7270});
    for (int inst = 0; inst < count; ++inst) {
        const int n = 2 + inst % 5;
        c.laws.push_back(random_laws(n, 4, s));
        c.kernels.push_back(random_poly_kernel(n, s));
        c.splits.push_back(hoeffding_project(c.kernels.back(), c.laws.back()));
    }
    return c;
}

// ---------------------------------------------------------------------------

bool crit1_reconstruction(const Corpus& corpus) {
    for (std::size_t inst = 0; inst < corpus.laws.size(); ++inst) {
        for (std::uint64_t rep = 0; rep < 3; ++rep) {
            const auto batch = sample_batch(corpus.laws[inst], 1000 + inst, rep);
            const double direct = evaluate_ustat(corpus.kernels[inst], batch);
            const double recon = corpus.splits[inst].reconstruct(batch);
            const double scale = std::max(1.0, std::abs(direct));
            if (std::abs(recon - direct) / scale > 1e-12) return false;
        }
    }
    return true;
}

bool crit2_degeneracy(const Corpus& corpus) {
    for (std::size_t inst = 0; inst < corpus.laws.size(); ++inst) {
        const auto report =
            degeneracy_check(corpus.splits[inst].degenerate, corpus.laws[inst]);
        if (!report.exact || !report.pass) return false;
    }
    return true;
}

bool crit3_variance_identity() {
    // exact enumeration at n <= 4
    auto s = rng::Stream::derive(33, {0x76617249});
    for (int inst = 0; inst < 30; ++inst) {
        const int n = 3 + inst % 2;
        const auto laws = random_laws(n, 3, s);
        const auto kernel = random_poly_kernel(n, s);
        const auto split = hoeffding_project(kernel, laws);
        const auto law = enumerate_statistic_law(split.degenerate, laws,
                                                 Transform::Decoupled);
        double mean = 0.0, second = 0.0;
        for (std::size_t k = 0; k < law.values.size(); ++k) {
            mean += law.probs[k] * law.values[k];
            second += law.probs[k] * law.values[k] * law.values[k];
        }
        const double var = second - mean * mean;
        const double lh = lambda_half(split.degenerate, laws).value;
        if (std::abs(var - lh * lh) > 1e-10 * std::max(1.0, lh * lh)) return false;
    }
    // monte carlo at n = 50, R = 1e5 for the product kernel on rademacher laws
    SimulationPlan plan;
    const int n = 50;
    plan.laws.assign(n, DistributionSpec::rademacher());
    plan.n = n;
    plan.kernel = offdiag_ones(n);
    plan.statistic = StatisticKind::Decoupled;
    plan.replications = 100000;
    plan.seed = 404;
    plan.tail_plan = false;
    const auto report = run(plan);
    const double target = static_cast<double>(n) * (n - 1);  // sum E f^2
    const double m4 = report.abs_moments[3];
    const double se = std::sqrt(
        std::max(0.0, m4 - report.variance * report.variance) /
        static_cast<double>(report.count));
    return std::abs(report.variance - target) <= 4.0 * se;
}

bool crit4_decoupling_constant() {
    auto s = rng::Stream::derive(44, {0x646563});
    for (int inst = 0; inst < 50; ++inst) {
        const int n = 3 + inst % 2;
        std::vector<DistributionSpec> laws;
        for (int i = 0; i < n; ++i) {
            const double p = 0.25 + 0.5 * s.uniform();
            laws.push_back(DistributionSpec::finite_scalar({-1.0, 1.0}, {p, 1 - p}));
        }
        const auto kernel = random_poly_kernel(n, s);
        const auto report = decoupling_moment_check(kernel, laws, {1.0, 2.0, 4.0});
        if (!report.pass) return false;
    }
    return true;
}

bool crit5_chaos() {
    auto s = rng::Stream::derive(55, {0x6368616f});
    for (int inst = 0; inst < 50; ++inst) {
        const int n = 3 + inst % 8;
        std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j)
                    a[static_cast<std::size_t>(i) * n + j] = 2 * s.uniform() - 1;
        if (!chaos_psi1_check(ChaosSpec::from_matrix(a, n)).pass) return false;
    }
    return true;
}

bool crit6_moment_lemmas() {
    auto s = rng::Stream::derive(66, {0x6c656d});
    for (int inst = 0; inst < 100; ++inst) {
        const int n = 2 + inst % 3;
        std::vector<DistributionSpec> centered, plain;
        for (int i = 0; i < n; ++i) {
            const double a = 0.2 + s.uniform();
            const double p = 0.2 + 0.6 * s.uniform();
            centered.push_back(DistributionSpec::finite_scalar(
                {a, -a * p / (1 - p)}, {p, 1 - p}));
            plain.push_back(DistributionSpec::finite_scalar(
                {3 * s.uniform(), 3 * s.uniform()}, {p, 1 - p}));
        }
        for (double p : {1.0, 2.0, 3.0, 4.0}) {
            if (!sum_moment_lemma(centered, p).pass) return false;
            for (double alpha : {0.5, 1.0, 2.0})
                if (!max_moment_lemma(plain, p, alpha).pass) return false;
        }
    }
    return true;
}

bool crit7_operator_norm() {
    auto s = rng::Stream::derive(77, {0x6f706e});
    for (int inst = 0; inst < 100; ++inst) {
        // block dimension 2n with binary scalar supports, up to 200 x 200
        const int n = 3 + static_cast<int>((97.0 * inst) / 99.0);
        std::vector<DistributionSpec> laws;
        for (int i = 0; i < n; ++i) {
            const double p = 0.25 + 0.5 * s.uniform();
            laws.push_back(DistributionSpec::finite_scalar({-1.0, 1.0}, {p, 1 - p}));
        }
        std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j)
                    a[static_cast<std::size_t>(i) * n + j] = 2 * s.uniform() - 1;
        const auto kernel = KernelFamily::from_matrix(std::move(a), n);
        const auto result = operator_norm(kernel, laws);
        if (!result.dense_checked) return false;
        if (std::abs(result.value - result.dense_value) >
            1e-8 * std::max(1.0, result.dense_value))
            return false;
        const double lhalf = lambda_half(kernel, laws).value;
        if (result.value > lhalf * (1.0 + 1e-9)) return false;
    }
    return true;
}

bool crit8_psi_norm() {
    auto s = rng::Stream::derive(88, {0x707369});
    for (int inst = 0; inst < 100; ++inst) {
        const auto law = random_laws(1, 4, s).front();
        ScalarLaw scalar;
        {
            std::vector<double> vals, probs;
            for (std::size_t a = 0; a < law.finite.size(); ++a) {
                vals.push_back(law.finite.atoms[a][0]);
                probs.push_back(law.finite.probs[a]);
            }
            scalar = ScalarLaw::finite(vals, probs);
        }
        if (scalar.max_abs() == 0.0) continue;
        for (double alpha : {0.5, 1.0, 2.0}) {
            const auto est = psi_norm(scalar, alpha, 1e-8);
            if (est.zero) continue;
            if (psi_moment(scalar, alpha, est.hi) > 2.0 * (1.0 + 1e-9)) return false;
            if (psi_moment(scalar, alpha, est.lo) < 2.0 * (1.0 - 1e-9)) return false;
            auto scaled = scalar;
            for (auto& v : scaled.values) v *= 3.7;
            const auto sc = psi_norm(scaled, alpha, 1e-8);
            if (std::abs(sc.value - 3.7 * est.value) > 1e-6 * 3.7 * est.value)
                return false;
        }
    }
    return true;
}

struct TailInstance {
    SimulationPlan plan;
    TailEnvelope envelope;
};

TailInstance chaos_instance(std::uint64_t seed, std::int64_t reps, int n = 20) {
    auto s = rng::Stream::derive(9, {0x74616961});
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) a[static_cast<std::size_t>(i) * n + j] = s.rademacher() * 0.5;
    TailInstance inst;
    inst.plan.laws.assign(n, DistributionSpec::rademacher());
    inst.plan.n = n;
    inst.plan.kernel = KernelFamily::from_matrix(a, n);
    inst.plan.statistic = StatisticKind::DegenerateUstat;
    inst.plan.replications = reps;
    inst.plan.seed = seed;
    inst.plan.grid_in_envelope_units = true;
    inst.envelope.profile.set_orders(2.0, 2.0);
    inst.envelope.profile.n = n;
    inst.envelope.profile.lambda_half =
        lambda_half(inst.plan.kernel, inst.plan.laws).value;
    inst.envelope.profile.lambda_one =
        operator_norm(inst.plan.kernel, inst.plan.laws).value;
    return inst;
}

TailInstance gaussian_instance(std::uint64_t seed, std::int64_t reps) {
    const int n = 200;
    TailInstance inst;
    inst.plan.laws.assign(n, DistributionSpec::gaussian(0.0, 1.0));
    inst.plan.n = n;
    inst.plan.kernel = offdiag_ones(n);
    inst.plan.statistic = StatisticKind::Symmetrized;
    inst.plan.replications = reps;
    inst.plan.seed = seed;
    inst.plan.grid_in_envelope_units = true;
    auto& prof = inst.envelope.profile;
    prof.set_orders(2.0, 2.0);
    prof.n = n;
    const double ln = log_n(n);
    const double c_norm = std::sqrt(8.0 / 3.0);  // psi_2 norm of a standard normal
    prof.c_phi = prof.c_psi = c_norm;
    prof.b_w = 1.0;
    prof.lambda_half = std::sqrt(static_cast<double>(n) * (n - 1));
    prof.lambda_one = static_cast<double>(n - 1);
    prof.lambda_2 = c_norm * c_norm * std::pow(ln, 1.0);
    prof.lambda_32_alpha = c_norm * std::sqrt(ln) * std::sqrt(static_cast<double>(n - 1));
    prof.lambda_32_beta = prof.lambda_32_alpha;
    prof.lambda_alpha_star =
        std::sqrt(ln) * prof.lambda_32_alpha + ln * prof.lambda_2;
    prof.lambda_beta_star = prof.lambda_alpha_star;
    return inst;
}

std::vector<double> tail_t_grid() {
    // 20 points with budgets 2 exp(-t) spanning 1e-1 .. 1e-4
    std::vector<double> grid;
    const double lo = std::log(2.0 / 1e-1), hi = std::log(2.0 / 1e-4);
    for (int k = 0; k < 20; ++k)
        grid.push_back(lo + (hi - lo) * k / 19.0);
    return grid;
}

bool tail_instance_ok(TailInstance inst, std::string& note) {
    inst.plan.t_grid = tail_t_grid();
    const auto report = run(inst.plan);
    const auto audit = envelope_audit(report, inst.envelope);
    if (!audit.fit_finite) {
        note += " fit diverged;";
        return false;
    }
    auto fitted = inst.envelope;
    fitted.constants.k_tail = audit.fitted_k;
    const auto check = envelope_audit(report, fitted);
    if (check.any_violation) {
        note += " violation at fitted constant;";
        return false;
    }
    // stability across two disjoint seed halves
    auto half = inst;
    half.plan.replications = inst.plan.replications / 2;
    half.plan.t_grid = inst.plan.t_grid;
    half.plan.seed = inst.plan.seed * 2 + 1;
    const auto ra = run(half.plan);
    half.plan.seed = inst.plan.seed * 2 + 2;
    const auto rb = run(half.plan);
    const double ka = envelope_audit(ra, inst.envelope).fitted_k;
    const double kb = envelope_audit(rb, inst.envelope).fitted_k;
    if (std::abs(ka - kb) / std::max(ka, kb) > 0.10) {
        note += " unstable fit (" + std::to_string(ka) + " vs " +
                std::to_string(kb) + ");";
        return false;
    }
    return true;
}

bool crit9_tail_envelope(std::string& note) {
    bool ok = tail_instance_ok(chaos_instance(1001, 1000000), note);
    ok = tail_instance_ok(gaussian_instance(2002, 1000000), note) && ok;
    return ok;
}

bool crit10_regimes(std::string& note) {
    const std::size_t r = 200000;
    std::vector<double> expo(r), gauss(r);
    for (std::size_t k = 0; k < r; ++k) {
        const double u = (static_cast<double>(k) + 0.5) / r;
        expo[k] = -std::log(u);
        gauss[k] = std::sqrt(-std::log(u));
    }
    const auto re = regime_slope(report_from_samples(expo, {}, 11));
    const auto rg = regime_slope(report_from_samples(gauss, {}, 12));
    bool ok = true;
    if (std::abs(re.slope - 1.0) > 0.05 || std::abs(rg.slope - 2.0) > 0.05) {
        note += " synthetic slopes " + std::to_string(re.slope) + ", " +
                std::to_string(rg.slope) + ";";
        ok = false;
    }
    // n large enough that the integer-lattice chaos has distinct quantiles
    // and the top-decile window still sits in the quadratic regime
    auto inst = chaos_instance(3003, 200000, 80);
    const auto report = run(inst.plan);
    const auto rc = regime_slope(report);
    if (rc.slope < 1.5 || rc.se > 0.1) {
        note += " chaos near-center slope " + std::to_string(rc.slope) + " se " +
                std::to_string(rc.se) + ";";
        ok = false;
    }
    return ok;
}

bool crit11_quadratic_functional(std::string& note) {
    const int n = 2000, reps = 200;
    const std::vector<DistributionSpec> laws(n, DistributionSpec::gaussian(0.0, 1.0));
    double total = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        const auto batch = sample_batch(laws, 1111, static_cast<std::uint64_t>(rep));
        total += quadratic_functional(batch, 0.3, SmoothingKernel::Gaussian, 1);
    }
    const double mean = total / reps;
    const double target = 1.0 / (2.0 * std::sqrt(std::numbers::pi));
    note += " mean " + std::to_string(mean) + " target " + std::to_string(target);
    return std::abs(mean - target) < 0.02;
}

FiniteKernelClass random_finite_class(int n, rng::Stream& s) {
    FiniteKernelClass cls;
    const int members = 2 + static_cast<int>(s.next_u64() % 2);
    auto coefs = std::make_shared<std::vector<double>>();
    for (int m = 0; m < members; ++m) {
        coefs->push_back(0.25 + s.uniform());
        coefs->push_back(s.uniform() - 0.5);
    }
    for (int m = 0; m < members; ++m) {
        const double c = (*coefs)[2 * m], d = (*coefs)[2 * m + 1];
        cls.members.push_back(KernelFamily::generic(
            [c, d](int, int, std::span<const double> a, std::span<const double> b) {
                return c * a[0] * b[0] + d * a[0];
            },
            false));
    }
    cls.envelope = KernelFamily::generic(
        [coefs, members](int, int, std::span<const double> a,
                         std::span<const double> b) {
            double top = 0.0;
            for (int m = 0; m < members; ++m)
                top = std::max(top, std::abs((*coefs)[2 * m] * a[0] * b[0] +
                                             (*coefs)[2 * m + 1] * a[0]));
            return top * (1.0 + 1e-12) + 1e-12;
        },
        false);
    cls.has_envelope = true;
    cls.uniform_bound = 3.0;  // |z| <= 1, |c| <= 1.25, |d| <= 0.5
    (void)n;
    return cls;
}

bool crit12_entropy(std::string& note) {
    // two-member closed form
    FiniteKernelClass two;
    const auto constant = [](double c) {
        return KernelFamily::generic(
            [c](int, int, std::span<const double>, std::span<const double>) {
                return c;
            },
            true);
    };
    two.members = {constant(0.0), constant(0.6)};
    two.envelope = constant(0.6);
    two.has_envelope = true;
    two.uniform_bound = 0.6;
    std::vector<DiscreteMeasure> qf{DiscreteMeasure::uniform({{0.0}, {1.0}})};
    for (double delta : {0.1, 0.5, 0.99, 1.5, 3.0}) {
        const auto prof = entropy_integral(two, delta, qf);
        if (std::abs(prof.j2 - std::log(2.0) * std::min(delta, 1.0)) > 1e-6) {
            note += " closed form mismatch at delta " + std::to_string(delta) + ";";
            return false;
        }
    }
    // fitted universal constant over an enumerable corpus
    auto s = rng::Stream::derive(1212, {0x656e74});
    double fitted = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const int n = 3;
        std::vector<DistributionSpec> laws;
        for (int i = 0; i < n; ++i) {
            const double p = 0.3 + 0.4 * s.uniform();
            laws.push_back(DistributionSpec::finite_scalar({-1.0, 1.0}, {p, 1 - p}));
        }
        const auto cls = random_finite_class(n, s);
        const auto terms = thm32_terms(cls, laws);
        std::vector<DiscreteMeasure> q_family;
        for (const auto& law : laws)
            q_family.push_back(DiscreteMeasure::from_support(law.support()));
        const auto bound =
            maximal_bound(cls, laws, terms.a_n, std::max(terms.b_n, terms.a_n),
                          q_family);
        const double lhs = thm32_lhs(cls, laws);
        if (!(bound.bound > 0.0) || !std::isfinite(lhs)) {
            note += " degenerate corpus instance " + std::to_string(inst) + ";";
            return false;
        }
        fitted = std::max(fitted, lhs / bound.bound);
    }
    note += " fitted C " + std::to_string(fitted);
    return std::isfinite(fitted) && fitted > 0.0;
}

bool crit13_performance(std::string& note) {
    const int n = 20000;
    const std::vector<DistributionSpec> laws(n, DistributionSpec::gaussian(0.0, 1.0));
    const auto batch = sample_batch(laws, 1313, 0);
    const auto kernel = KernelFamily::generic(
        [](int, int, std::span<const double> a, std::span<const double> b) {
            return a[0] * b[0];
        },
        true);
    UStatOptions serial_opts, parallel_opts;
    serial_opts.parallel = false;
    parallel_opts.parallel = true;
    const double t0 = now();
    const double serial = evaluate_ustat(kernel, batch, nullptr, serial_opts);
    const double t1 = now();
    const double parallel = evaluate_ustat(kernel, batch, nullptr, parallel_opts);
    const double t2 = now();
    bool ok = true;
    if (std::memcmp(&serial, &parallel, sizeof serial) != 0) {
        note += " serial/parallel values differ;";
        ok = false;
    }
    // worker-count invariance of a full simulation report
    SimulationPlan plan;
    plan.laws.assign(8, DistributionSpec::rademacher());
    plan.n = 8;
    plan.kernel = offdiag_ones(8);
    plan.statistic = StatisticKind::Symmetrized;
    plan.replications = 20000;
    plan.seed = 7;
    plan.tail_plan = false;
    plan.workers = 1;
    const auto one = run(plan);
    plan.workers = 8;
    const auto eight = run(plan);
    if (std::memcmp(&one.mean, &eight.mean, sizeof one.mean) != 0 ||
        one.sorted_abs != eight.sorted_abs) {
        note += " report differs across worker counts;";
        ok = false;
    }
    if (reduce::max_workers() >= 8) {
        if (t2 - t1 >= 2.0) {
            note += " parallel evaluation took " + std::to_string(t2 - t1) + " s;";
            ok = false;
        }
        if ((t1 - t0) / (t2 - t1) < 4.0) {
            note += " speedup " + std::to_string((t1 - t0) / (t2 - t1)) + " < 4;";
            ok = false;
        }
    } else {
        note += " timing/speedup subchecks SKIPPED (" +
                std::to_string(reduce::max_workers()) +
                " worker(s) available, need 8);";
    }
    note += " serial " + std::to_string(t1 - t0) + " s, parallel " +
            std::to_string(t2 - t1) + " s";
    return ok;
}

int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& note = {}) {
    std::printf("criterion %2d: %s - %s%s\n", idx, pass ? "PASS" : "FAIL", name,
                note.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

template <class Fn>
void guarded(int idx, const char* name, Fn&& fn) {
    std::string note;
    bool pass = false;
    try {
        pass = fn(note);
    } catch (const std::exception& e) {
        note += std::string(" exception: ") + e.what() + ";";
    }
    report(idx, name, pass, note);
}

}  // namespace

int main() {
    const auto corpus = make_corpus(100, 1);
    guarded(1, "hoeffding reconstruction",
            [&](std::string&) { return crit1_reconstruction(corpus); });
    guarded(2, "projected degeneracy",
            [&](std::string&) { return crit2_degeneracy(corpus); });
    guarded(3, "decoupled variance identity",
            [](std::string&) { return crit3_variance_identity(); });
    guarded(4, "decoupling moment constant",
            [](std::string&) { return crit4_decoupling_constant(); });
    guarded(5, "chaos psi_1 bound", [](std::string&) { return crit5_chaos(); });
    guarded(6, "sum/max moment lemmas",
            [](std::string&) { return crit6_moment_lemmas(); });
    guarded(7, "operator norm agreement",
            [](std::string&) { return crit7_operator_norm(); });
    guarded(8, "psi norm certificates",
            [](std::string&) { return crit8_psi_norm(); });
    guarded(9, "tail envelope validity",
            [](std::string& note) { return crit9_tail_envelope(note); });
    guarded(10, "regime diagnostics",
            [](std::string& note) { return crit10_regimes(note); });
    guarded(11, "quadratic functional",
            [](std::string& note) { return crit11_quadratic_functional(note); });
    guarded(12, "entropy machinery",
            [](std::string& note) { return crit12_entropy(note); });
    guarded(13, "performance and determinism",
            [](std::string& note) { return crit13_performance(note); });
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
