#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ustat/envelopes.hpp"
#include "ustat/kernel.hpp"
#include "ustat/stats.hpp"
#include "ustat/uprocess.hpp"

namespace ustat {

enum class StatisticKind { DegenerateUstat, Decoupled, Symmetrized, SupProcess };

// One replication draws its own counter-derived streams from (seed, index),
// so scheduling and worker count never change any sampled value.
struct SimulationPlan {
    KernelFamily kernel;
    FiniteKernelClass cls;   // used when statistic == SupProcess
    bool has_class = false;
    std::vector<DistributionSpec> laws;
    int n = 0;
    std::int64_t replications = 0;
    std::uint64_t seed = 0;
    std::vector<double> t_grid;            // strictly increasing probe points
    bool grid_in_envelope_units = false;   // t maps to a threshold via an envelope
    StatisticKind statistic = StatisticKind::DegenerateUstat;
    int workers = 0;                       // 0 = library default
    bool tail_plan = true;                 // enforces replications >= 1000

    void validate() const;
};

struct TailRow {
    double t = 0.0;          // probe point (grid units)
    double threshold = 0.0;  // absolute threshold counted against
    std::int64_t count = 0;
    double estimate = 0.0;
    Interval ci;             // Clopper-Pearson 99%
};

struct SimulationReport {
    std::int64_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    std::array<double, 4> abs_moments{};  // E|U|^p, p = 1..4
    std::vector<TailRow> tail;            // filled here for absolute grids,
                                          // by envelope_audit otherwise
    std::vector<double> sorted_abs;       // ascending |statistic|
    std::vector<double> t_grid;
    bool grid_in_envelope_units = false;
    std::uint64_t seed = 0;
    std::int64_t workers_used = 0;
};

SimulationReport run(const SimulationPlan& plan);

// Builds the same report from externally produced samples (synthetic tails,
// split-half studies). t_grid is in absolute units.
SimulationReport report_from_samples(std::vector<double> samples,
                                     std::vector<double> t_grid,
                                     std::uint64_t seed = 0);

struct AuditRow {
    double t = 0.0;
    double threshold = 0.0;  // K' * T(t)
    std::int64_t count = 0;
    double estimate = 0.0;
    Interval ci;
    double budget = 0.0;     // 2 exp(-t)
    bool violation = false;  // CP lower bound exceeds the budget
};

struct EnvelopeAudit {
    std::vector<AuditRow> rows;
    double fitted_k = 0.0;
    bool fit_finite = false;
    bool any_violation = false;
};

// Probes the report at envelope-mapped thresholds; requires an envelope-unit
// grid. Constant fitting is delegated to fit_tail_constant.
EnvelopeAudit envelope_audit(const SimulationReport& report,
                             const TailEnvelope& envelope);

struct RegimeEstimate {
    double slope = 0.0;
    double se = 0.0;  // bootstrap, 200 resamples by default
    int points = 0;
};

// Least-squares slope of log(-log tail) against log threshold over the
// [q_lo, q_hi] sample-quantile window; needs >= 20 usable tail points.
RegimeEstimate regime_slope(const SimulationReport& report, double q_lo = 0.9,
                            double q_hi = 1.0, int bootstrap = 200);

// JSON-lines: one summary record then one record per tail probe.
void write_report_jsonl(const SimulationReport& report, std::ostream& out);
// RFC-4180 tail table.
void write_tail_csv(const SimulationReport& report, std::ostream& out);

}  // namespace ustat
