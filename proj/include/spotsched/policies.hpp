#ifndef SPOTSCHED_POLICIES_HPP
#define SPOTSCHED_POLICIES_HPP

#include <deque>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spotsched/forecast.hpp"
#include "spotsched/job.hpp"

namespace spotsched {

// Prediction-based policy: plans over an omega-slot forecast window,
// executes the average of the last `commit` plans, and treats spot below
// sigma * p_od as cheap when ahead of schedule.
struct AhapSpec {
    int omega = 3;
    int commit = 1;
    double sigma = 0.7;
};

// Reactive fallback without forecasts, driven by progress/price/availability
// ratios against the previous slot.
struct AhanpSpec {
    double sigma = 0.7;
};

struct OdOnlySpec {};
struct MsuSpec {};
struct UpSpec {};

using PolicySpec = std::variant<AhapSpec, AhanpSpec, OdOnlySpec, MsuSpec, UpSpec>;

// Wire grammar: `ahap:w=3,v=2,s=0.7` | `ahanp:s=0.5` | `od` | `msu` | `up`.
std::string format_policy(const PolicySpec& spec);
PolicySpec parse_policy(std::string_view text);
void validate_policy(const PolicySpec& spec);

// The canonical 112-policy pool: AHAP over omega 1..5, commit 1..omega,
// sigma 0.3..0.9 (105 specs, sorted by omega, commit, sigma), then AHANP
// over the same 7 sigma values.
std::vector<PolicySpec> build_policy_pool();

enum class AhapAggregate { Mean, Sum };

struct StoredPlan {
    int origin_slot = 0;
    std::vector<Allocation> allocations;
};

// Per-run AHAP memory: the last `commit` plans keyed by origin slot.
// `exact_arithmetic` switches the window solver to exact rationals.
struct AhapState {
    int commit = 1;
    AhapAggregate aggregate = AhapAggregate::Mean;
    bool exact_arithmetic = false;
    std::deque<StoredPlan> plans;
};

// Per-slot information set: the current observable market state plus the
// job's progress before this slot.
struct Observation {
    int slot = 1;
    double spot_price = 0.0;
    int spot_avail = 0;
    ProgressState progress;
};

Allocation decide_ahap(const AhapSpec& spec, AhapState& state, const Observation& obs,
                       const Forecast& forecast, const JobSpec& job,
                       const ThroughputModel& tp, const OverheadModel& ov, double od_price);

Allocation decide_ahanp(const AhanpSpec& spec, const Observation& obs, const JobSpec& job,
                        const ThroughputModel& tp, const OverheadModel& ov, double od_price,
                        int prev_total, int prev_avail);

Allocation decide_od_only(const Observation& obs, const JobSpec& job,
                          const ThroughputModel& tp, const OverheadModel& ov,
                          double od_price);

Allocation decide_msu(const Observation& obs, const JobSpec& job, const ThroughputModel& tp,
                      const OverheadModel& ov, double od_price);

Allocation decide_up(const Observation& obs, const JobSpec& job, const ThroughputModel& tp,
                     const OverheadModel& ov, double od_price);

// Clamps a nonzero total into [n_min, n_max], adjusting the on-demand
// component first in either direction.
Allocation clamp_allocation(Allocation a, int n_min, int n_max);

}  // namespace spotsched

#endif
