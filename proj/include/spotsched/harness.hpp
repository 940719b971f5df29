#ifndef SPOTSCHED_HARNESS_HPP
#define SPOTSCHED_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spotsched/config.hpp"
#include "spotsched/forecast.hpp"
#include "spotsched/job.hpp"
#include "spotsched/market.hpp"
#include "spotsched/policies.hpp"
#include "spotsched/selector.hpp"

namespace spotsched {

enum class ForecasterKind { Ar, NoisyOracle };

struct ForecasterConfig {
    ForecasterKind kind = ForecasterKind::NoisyOracle;
    int order = 4;  // AR model order
    NoiseSpec noise;
};

// Outcome of one policy on one job. `utility_raw` always equals
// tilde_value(z_ddl) - cost recomputed from the allocations.
struct JobResult {
    std::string policy;
    double utility_raw = 0.0;
    double utility_norm = 0.0;
    double completion_slot = 0.0;  // fractional when finished after the deadline
    double cost = 0.0;             // accrued before the deadline
    double z_ddl = 0.0;
    int start_slot = 0;
    std::vector<Allocation> allocations;  // executed slots; trailing slots idle
};

// Runs one job slot by slot: observe, forecast (AHAP only), decide, cap
// spot by true availability, step; stops early on completion. With
// `exact_window` the AHAP window subproblems are solved in exact rationals.
JobResult run_job(const PolicySpec& policy, const JobSpec& job, const SpotTrace& trace,
                  const ForecasterConfig& forecaster, const ThroughputModel& tp,
                  const OverheadModel& ov, double od_price, int start_slot,
                  bool exact_window = false);

// Checks emitted allocations against the trace: spot never exceeds true
// availability and totals stay in {0} u [n_min, n_max].
bool audit_allocations(const JobResult& result, const SpotTrace& trace, const JobSpec& job);

struct JobDistribution {
    int workload_min = 70;
    int workload_max = 120;
    int deadline = 10;
    int n_min_low = 1;
    int n_min_high = 4;
    int n_max_low = 12;
    int n_max_high = 16;
    double value = 100.0;
    double gamma = 1.5;
};

JobSpec draw_job(const JobDistribution& dist, std::mt19937_64& rng);

enum class SweepKind { Deadline, Overhead, Avail, Price };

struct SweepRow {
    std::string sweep_param;
    double sweep_value = 0.0;
    std::string policy;
    double mean_utility = 0.0;
    double stderr_mean = 0.0;
    int runs = 0;
};

// Everything needed to drive an experiment, mirroring the config file.
struct Experiment {
    JobSpec job;
    ThroughputModel throughput;
    OverheadModel overhead;
    double od_price = 1.0;
    SpotTrace trace;
    ForecasterConfig forecaster;
    std::vector<PolicySpec> policies;
    bool use_pool = false;
    JobDistribution jobs;
    std::uint64_t seed = 0;
    int start_slot = 0;
    int select_jobs = 1000;
    std::optional<double> eta;
    int threads = 1;

    SweepKind sweep_kind = SweepKind::Deadline;
    std::vector<double> sweep_values;
    int sweep_runs = 50;

    struct Phase {
        int end_iteration = 0;
        NoiseSpec noise;
    };
    std::vector<Phase> phases;
};

Experiment load_experiment(const ConfigFile& cfg);

// One row per (sweep value, policy): mean and standard error of the
// normalized utility over `sweep_runs` seeded job/trace draws.
std::vector<SweepRow> run_sweep(const Experiment& exp);

// Full-information selection over the experiment's policy list (or the
// canonical 112-policy pool when `use_pool` is set).
SelectionRun run_pool_selection(const Experiment& exp);

struct AdaptResult {
    SelectionRun run;
    // (phase end iteration, argmax policy index after that iteration)
    std::vector<std::pair<int, int>> phase_argmax;
};

// Selection with the forecaster's noise switched at phase boundaries;
// weights carry across boundaries without reset.
AdaptResult run_adapt_phases(const Experiment& exp);

void write_job_results_csv(const std::vector<JobResult>& results, std::ostream& out);
void write_job_results_jsonl(const std::vector<JobResult>& results, std::ostream& out);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace spotsched

#endif
