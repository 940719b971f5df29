#ifndef SPOTSCHED_SELECTOR_HPP
#define SPOTSCHED_SELECTOR_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "spotsched/job.hpp"

namespace spotsched {

// Simplex-constrained weights over the policy pool: every component
// positive, components summing to 1 within 1e-12.
using WeightVector = std::vector<double>;

WeightVector init_weights(int m);

// Multiplicative update with the maximum utility subtracted inside the
// exponent; invariant under shifting all utilities by a constant.
WeightVector update_weights(const WeightVector& w, const std::vector<double>& u, double eta);

// Affine map of a raw utility onto [0, 1], clamping first.
double normalize_utility(double raw, double u_min, double u_max);

// Provable utility extremes of a job: full value, and a full-horizon
// maximum-parallelism on-demand spend returning nothing.
double default_utility_max(const JobSpec& job);
double default_utility_min(const JobSpec& job, double od_price);

double learning_rate(int m, int k_total);

int select_policy(const WeightVector& w, std::uint64_t seed);
int select_policy(const WeightVector& w, std::mt19937_64& rng);

struct IterationRecord {
    int k = 0;       // 1-based iteration
    int chosen = 0;  // sampled policy index
    std::vector<double> weights;    // weights used for this iteration
    std::vector<double> utilities;  // normalized utilities of all policies
};

struct SelectionRun {
    int jobs = 0;  // K
    int pool_size = 0;  // M
    double eta = 0.0;
    std::uint64_t seed = 0;
    std::vector<IterationRecord> history;
    std::vector<double> final_weights;
};

double expected_utility(const IterationRecord& rec);

// Full-information loop: for each job the caller reports the utility every
// pool policy would have achieved; weights update after every iteration.
SelectionRun run_selection(int pool_size, int jobs, std::optional<double> eta,
                           std::uint64_t seed,
                           const std::function<std::vector<double>(int)>& utilities_for_job);

// Best fixed policy in hindsight minus the selector's expected utility.
double regret(const SelectionRun& run);
double regret_bound(int jobs, int pool_size);

// One record per iteration:
// {"k":int,"chosen":int,"eta":float,"weights":[...],"utilities":[...]}
void write_history_jsonl(const SelectionRun& run, std::ostream& out);

}  // namespace spotsched

#endif
