// Command-line front end: decompose | bound | simulate | audit | entropy | bench.
// One JSON config drives each run; all randomness flows from its seed.
// Exit codes: 0 success, 1 input error, 2 precondition failure, 3 envelope
// violation. Config keys are documented in docs/config_schema.md.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ustat/constants.hpp"
#include "ustat/envelopes.hpp"
#include "ustat/hoeffding.hpp"
#include "ustat/kernel.hpp"
#include "ustat/montecarlo.hpp"
#include "ustat/reduce.hpp"
#include "ustat/uprocess.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const json& need(const json& j, const std::string& key) {
    if (!j.is_object() || !j.contains(key))
        throw InputError("config: missing key \"" + key + "\"");
    return j.at(key);
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (j.is_object() && j.contains(key)) return j.at(key).get<T>();
    return fallback;
}

json load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw InputError("config: cannot open " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw InputError(std::string("config: parse failure: ") + e.what());
    }
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw InputError("config: --set expects key=value, got \"" + ov + "\"");
        const std::string key = ov.substr(0, eq);
        const std::string raw = ov.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::exception&) {
            value = raw;  // unquoted strings pass through
        }
        json* node = &cfg;
        std::istringstream parts(key);
        std::string part, prev;
        bool first = true;
        while (std::getline(parts, part, '.')) {
            if (!first) node = &(*node)[prev];
            prev = part;
            first = false;
        }
        (*node)[prev] = value;
    }
    if (get_or<int>(cfg, "version", 0) != 1)
        throw InputError("config: unrecognized or missing version (expected 1)");
    return cfg;
}

std::vector<ustat::DistributionSpec> laws_from(const json& j) {
    using ustat::DistributionSpec;
    if (j.contains("per_index")) {
        std::vector<DistributionSpec> laws;
        for (const auto& item : j.at("per_index")) {
            json one = item;
            one["n"] = 1;
            auto sub = laws_from(one);
            laws.push_back(sub.front());
        }
        return laws;
    }
    const std::string type = need(j, "type").get<std::string>();
    const int n = need(j, "n").get<int>();
    if (n < 1) throw InputError("config: laws.n must be >= 1");
    DistributionSpec law;
    if (type == "rademacher") {
        law = DistributionSpec::rademacher(get_or<int>(j, "dim", 1));
    } else if (type == "gaussian") {
        law = DistributionSpec::gaussian(get_or<double>(j, "mean", 0.0),
                                         get_or<double>(j, "sd", 1.0),
                                         get_or<int>(j, "dim", 1));
    } else if (type == "weibull") {
        law = DistributionSpec::weibull_tail(get_or<double>(j, "shape", 1.0));
    } else if (type == "finite") {
        ustat::FiniteSupport s;
        for (const auto& a : need(j, "atoms")) {
            if (a.is_number())
                s.atoms.push_back({a.get<double>()});
            else
                s.atoms.push_back(a.get<std::vector<double>>());
        }
        s.probs = need(j, "probs").get<std::vector<double>>();
        law = DistributionSpec::finite_support(std::move(s));
    } else {
        throw InputError("config: unknown law type \"" + type + "\"");
    }
    law.validate();
    return std::vector<DistributionSpec>(static_cast<std::size_t>(n), law);
}

ustat::KernelFamily kernel_from(const json& j, int n) {
    using ustat::KernelFamily;
    const std::string type = need(j, "type").get<std::string>();
    KernelFamily k;
    if (type == "product") {
        k = KernelFamily::generic(
            [](int, int, std::span<const double> a, std::span<const double> b) {
                return a[0] * b[0];
            },
            true);
    } else if (type == "shifted-product") {
        const double s = get_or<double>(j, "shift", 1.0);
        k = KernelFamily::generic(
            [s](int, int, std::span<const double> a, std::span<const double> b) {
                return (a[0] + s) * (b[0] + s);
            },
            true);
    } else if (type == "zero") {
        k = KernelFamily::generic(
            [](int, int, std::span<const double>, std::span<const double>) {
                return 0.0;
            },
            true, KernelFamily::Degeneracy::Asserted);
    } else if (type == "matrix") {
        auto entries = need(j, "entries").get<std::vector<double>>();
        const int m = get_or<int>(j, "n", n);
        k = KernelFamily::from_matrix(std::move(entries), m);
    } else {
        throw InputError("config: unknown kernel type \"" + type + "\"");
    }
    const double scale = get_or<double>(j, "scale", 1.0);
    if (scale != 1.0) k = k.scaled(scale);
    return k;
}

bool all_finite_support(const std::vector<ustat::DistributionSpec>& laws) {
    for (const auto& law : laws)
        if (!law.has_finite_support()) return false;
    return true;
}

ustat::ExpectationMode mode_from(const json& cfg,
                                 const std::vector<ustat::DistributionSpec>& laws,
                                 std::uint64_t seed) {
    if (all_finite_support(laws)) return ustat::ExpectationMode::exact();
    return ustat::ExpectationMode::nested_mc(get_or<int>(cfg, "inner_samples", 4096),
                                             seed);
}

ustat::LambdaProfile profile_from(const json& cfg,
                                  const std::vector<ustat::DistributionSpec>& laws) {
    ustat::LambdaProfile prof;
    const json& p = need(cfg, "profile");
    prof.set_orders(get_or<double>(p, "alpha", 1.0), get_or<double>(p, "beta", 1.0));
    prof.n = get_or<int>(p, "n", static_cast<int>(laws.size()));
    if (get_or<bool>(p, "computed", false)) {
        const auto kernel = kernel_from(need(cfg, "kernel"), prof.n);
        prof.lambda_half = ustat::lambda_half(kernel, laws).value;
        prof.lambda_one = ustat::operator_norm(kernel, laws).value;
        const auto ab = ustat::lambda_alpha_beta(kernel, laws, prof.alpha, prof.beta);
        prof.lambda_alpha = ab.lambda_alpha;
        prof.lambda_beta = ab.lambda_beta;
        prof.k_f = ab.k_f;
        prof.k_g = ab.k_g;
        prof.notes.push_back("moment-bound family computed; tail family not set");
        return prof;
    }
    prof.lambda_half = get_or<double>(p, "lambda_half", 0.0);
    prof.lambda_one = get_or<double>(p, "lambda_one", 0.0);
    prof.lambda_alpha = get_or<double>(p, "lambda_alpha", 0.0);
    prof.lambda_beta = get_or<double>(p, "lambda_beta", 0.0);
    prof.lambda_2 = get_or<double>(p, "lambda_2", 0.0);
    prof.lambda_32_alpha = get_or<double>(p, "lambda_32_alpha", 0.0);
    prof.lambda_32_beta = get_or<double>(p, "lambda_32_beta", 0.0);
    prof.lambda_alpha_star = get_or<double>(p, "lambda_alpha_star", 0.0);
    prof.lambda_beta_star = get_or<double>(p, "lambda_beta_star", 0.0);
    prof.k_f = get_or<double>(p, "k_f", 0.0);
    prof.k_g = get_or<double>(p, "k_g", 0.0);
    return prof;
}

ustat::EnvelopeConstants constants_from(const json& cfg) {
    ustat::EnvelopeConstants c;
    if (!cfg.contains("envelope")) return c;
    const json& e = cfg.at("envelope");
    c.c = get_or<double>(e, "c", 1.0);
    c.c_alpha = get_or<double>(e, "c_alpha", 1.0);
    c.c_beta = get_or<double>(e, "c_beta", 1.0);
    c.c_alpha_beta = get_or<double>(e, "c_alpha_beta", 1.0);
    c.k_tail = get_or<double>(e, "k_tail", 1.0);
    c.k_uproc = get_or<double>(e, "k_uproc", 1.0);
    c.c_maximal = get_or<double>(e, "c_maximal", 1.0);
    return c;
}

ustat::FiniteKernelClass class_from(const json& j, int dim) {
    const std::string type = need(j, "type").get<std::string>();
    if (type != "bandwidth-grid")
        throw InputError("config: unknown class type \"" + type + "\"");
    const auto kind =
        ustat::smoothing_kernel_from_name(need(j, "kernel").get<std::string>());
    const auto hs = need(j, "h").get<std::vector<double>>();
    if (hs.empty()) throw InputError("config: class.h is empty");
    const int p = dim;
    ustat::FiniteKernelClass cls;
    double peak = 0.0;
    for (double h : hs) {
        if (!(h > 0.0)) throw InputError("config: bandwidths must be positive");
        cls.members.push_back(ustat::KernelFamily::generic(
            [kind, h, p](int, int, std::span<const double> a,
                         std::span<const double> b) {
                std::vector<double> u(static_cast<std::size_t>(p));
                for (int d = 0; d < p; ++d) u[static_cast<std::size_t>(d)] =
                    (a[static_cast<std::size_t>(d)] - b[static_cast<std::size_t>(d)]) / h;
                return ustat::smoothing_eval(kind, u) / std::pow(h, p);
            },
            true));
        std::vector<double> zero(static_cast<std::size_t>(p), 0.0);
        peak = std::max(peak, ustat::smoothing_eval(kind, zero) / std::pow(h, p));
    }
    auto members = cls.members;
    cls.envelope = ustat::KernelFamily::generic(
        [members](int i, int j, std::span<const double> a, std::span<const double> b) {
            double m = 0.0;
            for (const auto& f : members)
                m = std::max(m, std::abs(f.evaluate(i, j, a, b)));
            return m * (1.0 + 1e-12);
        },
        true);
    cls.has_envelope = true;
    cls.uniform_bound = peak * (1.0 + 1e-12);
    cls.class_weight_bound = cls.uniform_bound;
    return cls;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw InputError("config: cannot write " + (dir / name).string());
    return out;
}

struct Common {
    json cfg;
    fs::path outdir;
    std::uint64_t seed = 0;
    int workers = 0;
};

Common common_from(const json& cfg) {
    Common c;
    c.cfg = cfg;
    c.outdir = get_or<std::string>(cfg, "output_dir", ".");
    c.seed = get_or<std::uint64_t>(cfg, "seed", 0);
    c.workers = get_or<int>(cfg, "workers", 0);
    if (const char* env = std::getenv("USTAT_THREADS")) c.workers = std::atoi(env);
    if (c.workers > 0) ustat::reduce::set_workers(c.workers);
    return c;
}

int cmd_decompose(const Common& c) {
    const auto laws = laws_from(need(c.cfg, "laws"));
    const auto kernel = kernel_from(need(c.cfg, "kernel"),
                                    static_cast<int>(laws.size()));
    const auto mode = mode_from(c.cfg, laws, c.seed);
    const auto split = ustat::hoeffding_project(kernel, laws, mode);
    const auto report = ustat::degeneracy_check(split.degenerate, laws, mode);
    auto out = open_out(c.outdir, "decompose.jsonl");
    json summary{{"record", "summary"},
                 {"grand_mean", split.grand_mean},
                 {"exact", split.exact},
                 {"mode", split.mode_note},
                 {"max_abs_conditional_mean", report.max_abs_conditional_mean},
                 {"threshold", report.threshold},
                 {"degenerate", report.pass}};
    out << summary.dump() << "\n";
    if (split.exact) {
        const auto cache = ustat::AtomCache::build(laws, mode);
        std::size_t records = 0;
        for (int i = 0; i < cache.n() && records <= 4096; ++i)
            for (int j = 0; j < cache.n(); ++j) {
                if (i == j) continue;
                for (std::size_t a = 0; a < cache.size(i); ++a)
                    for (std::size_t b = 0; b < cache.size(j); ++b) {
                        if (++records > 4096) break;
                        json row{{"record", "kernel"}, {"i", i}, {"j", j},
                                 {"a", a},            {"b", b},
                                 {"value", split.degenerate.evaluate(
                                               i, j, cache.atom(i, a),
                                               cache.atom(j, b))}};
                        out << row.dump() << "\n";
                    }
            }
    }
    return report.pass ? 0 : 2;
}

int cmd_bound(const Common& c) {
    const auto t_grid = need(c.cfg, "t_grid").get<std::vector<double>>();
    if (t_grid.empty()) throw InputError("config: t_grid is empty");
    std::vector<ustat::DistributionSpec> laws;
    if (c.cfg.contains("laws")) laws = laws_from(c.cfg.at("laws"));
    ustat::TailEnvelope env;
    env.profile = profile_from(c.cfg, laws);
    env.constants = constants_from(c.cfg);
    env.strict_exponent = get_or<bool>(c.cfg, "strict_exponent", false);
    auto jout = open_out(c.outdir, "bound_profile.jsonl");
    jout << env.profile.to_jsonl() << "\n";

    auto csv = open_out(c.outdir, "bound_curve.csv");
    csv.precision(17);
    const auto first = env.evaluate(t_grid.front());
    csv << "t";
    for (const auto& label : first.labels) csv << ',' << label;
    csv << ",total\r\n";
    for (double t : t_grid) {
        const auto b = env.evaluate(t);
        csv << t;
        for (double v : b.terms) csv << ',' << v;
        csv << ',' << b.value << "\r\n";
    }
    return 0;
}

ustat::SimulationPlan plan_from(const Common& c) {
    ustat::SimulationPlan plan;
    plan.laws = laws_from(need(c.cfg, "laws"));
    plan.n = static_cast<int>(plan.laws.size());
    const json& p = need(c.cfg, "plan");
    const std::string stat = get_or<std::string>(p, "statistic", "symmetrized");
    if (stat == "degenerate")
        plan.statistic = ustat::StatisticKind::DegenerateUstat;
    else if (stat == "decoupled")
        plan.statistic = ustat::StatisticKind::Decoupled;
    else if (stat == "symmetrized")
        plan.statistic = ustat::StatisticKind::Symmetrized;
    else if (stat == "sup")
        plan.statistic = ustat::StatisticKind::SupProcess;
    else
        throw InputError("config: unknown statistic \"" + stat + "\"");
    if (plan.statistic == ustat::StatisticKind::SupProcess) {
        plan.cls = class_from(need(c.cfg, "class"), plan.laws.front().dimension);
        plan.has_class = true;
    } else {
        plan.kernel = kernel_from(need(c.cfg, "kernel"), plan.n);
    }
    plan.replications = need(p, "replications").get<std::int64_t>();
    plan.seed = c.seed;
    plan.workers = c.workers;
    plan.t_grid = get_or<std::vector<double>>(c.cfg, "t_grid", {});
    plan.grid_in_envelope_units =
        get_or<std::string>(c.cfg, "grid_units", "absolute") == "envelope";
    plan.tail_plan = get_or<bool>(p, "tail_plan", !plan.t_grid.empty());
    return plan;
}

int cmd_simulate(const Common& c) {
    const auto plan = plan_from(c);
    const auto report = ustat::run(plan);
    auto jout = open_out(c.outdir, "simulate.jsonl");
    ustat::write_report_jsonl(report, jout);
    auto csv = open_out(c.outdir, "simulate_tail.csv");
    ustat::write_tail_csv(report, csv);
    return 0;
}

int cmd_audit(const Common& c) {
    auto plan = plan_from(c);
    if (!plan.grid_in_envelope_units)
        throw InputError("config: audit requires grid_units = \"envelope\"");
    ustat::TailEnvelope env;
    env.profile = profile_from(c.cfg, plan.laws);
    env.constants = constants_from(c.cfg);
    env.strict_exponent = get_or<bool>(c.cfg, "strict_exponent", false);
    const auto report = ustat::run(plan);
    const auto audit = ustat::envelope_audit(report, env);
    auto out = open_out(c.outdir, "audit.jsonl");
    json summary{{"record", "summary"},
                 {"fitted_k", audit.fit_finite ? json(audit.fitted_k) : json()},
                 {"fit_finite", audit.fit_finite},
                 {"any_violation", audit.any_violation}};
    out << summary.dump() << "\n";
    for (const auto& row : audit.rows) {
        json r{{"record", "probe"},     {"t", row.t},
               {"threshold", row.threshold}, {"count", row.count},
               {"estimate", row.estimate},   {"ci_lo", row.ci.lo},
               {"ci_hi", row.ci.hi},         {"budget", row.budget},
               {"violation", row.violation}};
        out << r.dump() << "\n";
    }
    return audit.any_violation ? 3 : 0;
}

int cmd_entropy(const Common& c) {
    const auto laws = laws_from(need(c.cfg, "laws"));
    const auto cls = class_from(need(c.cfg, "class"), laws.front().dimension);
    const json& e = need(c.cfg, "entropy");
    const double delta = get_or<double>(e, "delta", 1.0);
    std::vector<ustat::DiscreteMeasure> q_family;
    for (const auto& law : laws)
        q_family.push_back(ustat::DiscreteMeasure::from_support(law.support()));
    const auto prof = ustat::entropy_integral(cls, delta, q_family);
    auto csv = open_out(c.outdir, "entropy.csv");
    csv.precision(17);
    csv << "eta,covering,log_covering\r\n";
    for (std::size_t k = 0; k < prof.eta_grid.size(); ++k)
        csv << prof.eta_grid[k] << ',' << prof.covering[k] << ','
            << std::log(static_cast<double>(prof.covering[k])) << "\r\n";
    auto jout = open_out(c.outdir, "entropy.jsonl");
    json summary{{"record", "summary"},
                 {"delta", delta},
                 {"j2", prof.j2},
                 {"lower_bound", prof.lower_bound_flag}};
    jout << summary.dump() << "\n";
    return 0;
}

int cmd_bench(const Common& c) {
    const json& b = c.cfg.contains("bench") ? c.cfg.at("bench") : json::object();
    const auto ns = get_or<std::vector<int>>(b, "n", {2000});
    std::vector<int> workers{1};
    const int wmax = c.workers > 0 ? c.workers : ustat::reduce::max_workers();
    if (wmax > 1) workers.push_back(wmax);
    auto csv = open_out(c.outdir, "bench.csv");
    csv << "n,workers,seconds,pairs_per_sec\r\n";
    std::cout << "n\tworkers\tseconds\tpairs/sec\n";
    for (int n : ns) {
        const std::vector<ustat::DistributionSpec> laws(
            static_cast<std::size_t>(n), ustat::DistributionSpec::gaussian(0.0, 1.0));
        const auto batch = ustat::sample_batch(laws, c.seed, 0);
        const auto kernel = ustat::KernelFamily::generic(
            [](int, int, std::span<const double> a, std::span<const double> z) {
                return a[0] * z[0];
            },
            true);
        for (int w : workers) {
            ustat::reduce::set_workers(w);
            ustat::UStatOptions opts;
            opts.parallel = w > 1;
            const auto t0 = std::chrono::steady_clock::now();
            const double value = ustat::evaluate_ustat(kernel, batch, nullptr, opts);
            const auto t1 = std::chrono::steady_clock::now();
            const double sec = std::chrono::duration<double>(t1 - t0).count();
            const double pairs =
                static_cast<double>(n) * (static_cast<double>(n) - 1.0);
            csv << n << ',' << w << ',' << sec << ',' << pairs / sec << "\r\n";
            std::cout << n << '\t' << w << '\t' << sec << '\t' << pairs / sec
                      << '\t' << "(value " << value << ")\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"degenerate second-order U-statistics toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> overrides;
    int (*handler)(const Common&) = nullptr;
    for (const auto& [name, fn] :
         std::vector<std::pair<std::string, int (*)(const Common&)>>{
             {"decompose", cmd_decompose}, {"bound", cmd_bound},
             {"simulate", cmd_simulate},   {"audit", cmd_audit},
             {"entropy", cmd_entropy},     {"bench", cmd_bench}}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("config", config_path, "JSON config path")->required();
        sub->add_option("--set", overrides, "dotted-key=value config override");
        const auto fn_copy = fn;
        sub->callback([&handler, fn_copy]() { handler = fn_copy; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    try {
        const json cfg = load_config(config_path, overrides);
        const Common c = common_from(cfg);
        try {
            return handler(c);
        } catch (const InputError&) {
            throw;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    }
}
