#ifndef SPOTSCHED_OPTIMIZER_HPP
#define SPOTSCHED_OPTIMIZER_HPP

#include <vector>

#include "spotsched/forecast.hpp"
#include "spotsched/job.hpp"
#include "spotsched/market.hpp"
#include "spotsched/rational.hpp"

namespace spotsched {

// Finite-window allocation problem solved when a job has fallen behind its
// reference trajectory: maximize end-of-window value minus in-window cost
// against forecast prices and availability.
struct WindowProblem {
    int start_slot = 1;  // current slot t, 1-based within the job
    int horizon = 0;     // requested window length omega
    ProgressState state;
    Forecast forecast;  // origin == start_slot, horizon >= effective horizon
    JobSpec job;
    ThroughputModel throughput;
    OverheadModel overhead;
    double od_price = 1.0;
};

struct PlanSequence {
    std::vector<Allocation> allocations;  // one per window slot
    double objective = 0.0;
};

struct ExactPlanSequence {
    std::vector<Allocation> allocations;
    Rational objective;
};

// Slots past the deadline carry no marginal value, so the searched window
// is clipped to min(horizon, d - t). Negative means the job is already
// past its deadline and the problem is ill-posed.
int effective_horizon(const WindowProblem& p);

// Exact maximizer over per-slot totals in {0} u [n_min, n_max], splitting
// each total into spot (when the forecast price beats on-demand) and
// on-demand. Ties break toward lower cost, fewer instance-slots, fewer
// on-demand slots, then the lexicographically earliest total sequence.
PlanSequence solve_window(const WindowProblem& p);
ExactPlanSequence solve_window_exact(const WindowProblem& p);

// Full-horizon optimum over the true trace (slot t reads trace slot t-1),
// in exact rational arithmetic. Deadlines beyond 8 slots are rejected.
ExactPlanSequence solve_offline_exact(const SpotTrace& trace, const JobSpec& job,
                                      const ThroughputModel& tp, const OverheadModel& ov,
                                      double od_price);
PlanSequence solve_offline(const SpotTrace& trace, const JobSpec& job,
                           const ThroughputModel& tp, const OverheadModel& ov,
                           double od_price);

}  // namespace spotsched

#endif
