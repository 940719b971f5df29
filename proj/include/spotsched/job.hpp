#ifndef SPOTSCHED_JOB_HPP
#define SPOTSCHED_JOB_HPP

#include <span>
#include <vector>

#include "spotsched/rational.hpp"

namespace spotsched {

// A fine-tuning job: total workload, soft deadline in slots, parallelism
// bounds, and the value/tolerance parameters of the revenue curve.
struct JobSpec {
    double workload = 80.0;  // L, in GPU-slot units
    int deadline = 10;       // d, slots
    int n_min = 1;
    int n_max = 12;
    double value = 100.0;  // v, revenue for on-time completion
    double gamma = 1.5;    // hard deadline at gamma * d
};

// Affine throughput: H(n) = alpha*n + beta for n >= 1, H(0) = 0.
struct ThroughputModel {
    double alpha = 1.0;
    double beta = 0.0;
};

// Effective computation fraction per slot: mu_up when the instance count
// grew, mu_down when it shrank, 1 when unchanged. mu_up <= mu_down <= 1.
struct OverheadModel {
    double mu_up = 0.9;
    double mu_down = 0.9;
};

struct Allocation {
    int n_od = 0;
    int n_spot = 0;
    int total() const { return n_od + n_spot; }
};

// State carried across slots of one simulation run. `slot` is the next
// slot to execute (1-based); progress and cost cover slots before it.
struct ProgressState {
    int slot = 1;
    double progress = 0.0;
    int prev_total = 0;
    double accrued_cost = 0.0;
};

// Absolute tolerance when testing progress against the workload.
inline constexpr double kCompletionTol = 1e-9;

void validate_job(const JobSpec& job);
void validate_throughput(const ThroughputModel& tp, const JobSpec& job);
void validate_overhead(const OverheadModel& ov);

double throughput(const ThroughputModel& tp, int n);
double effective_fraction(const OverheadModel& ov, int n_now, int n_prev);

// Revenue as a function of completion time: full value through the soft
// deadline, linear decay to zero at the hard deadline gamma*d.
double value_at(const JobSpec& job, double T);

// Reference trajectory (L/d)*t; callers may evaluate it past the deadline.
double expected_progress(const JobSpec& job, int t);

// Value of having completed z_ddl units by the deadline, with any
// remainder finished immediately afterwards on maximum-parallelism
// on-demand instances whose prorated cost is absorbed here.
double tilde_value(const JobSpec& job, const ThroughputModel& tp, const OverheadModel& ov,
                   double od_price, double z_ddl);

double utility(const JobSpec& job, const ThroughputModel& tp, const OverheadModel& ov,
               double od_price, double z_ddl, double cost_ddl);

ProgressState step(const ProgressState& state, const Allocation& alloc, double slot_price,
                   double od_price, const ThroughputModel& tp, const OverheadModel& ov);

// ---------------------------------------------------------------------------
// Numeric core, shared between the binary64 fast path and the exact
// rational oracle. Num is double or Rational.
// ---------------------------------------------------------------------------

template <class Num>
struct ScheduleParams {
    Num workload{};
    Num value{};
    Num gamma{};
    Num alpha{};
    Num beta{};
    Num mu_up{};
    Num mu_down{};
    Num od_price{};
    int deadline = 0;
    int n_min = 0;
    int n_max = 0;
};

ScheduleParams<double> make_params(const JobSpec& job, const ThroughputModel& tp,
                                   const OverheadModel& ov, double od_price);
ScheduleParams<Rational> make_exact_params(const JobSpec& job, const ThroughputModel& tp,
                                           const OverheadModel& ov, double od_price);

template <class Num>
Num throughput_n(const ScheduleParams<Num>& p, int n) {
    if (n <= 0) return Num(0);
    return p.alpha * Num(n) + p.beta;
}

template <class Num>
Num effective_fraction_n(const ScheduleParams<Num>& p, int n_now, int n_prev) {
    if (n_now > n_prev) return p.mu_up;
    if (n_now < n_prev) return p.mu_down;
    return Num(1);
}

template <class Num>
Num value_at_n(const ScheduleParams<Num>& p, const Num& T) {
    const Num d(p.deadline);
    if (T <= d) return p.value;
    const Num hard = p.gamma * d;
    if (T >= hard) return Num(0);
    return p.value * (Num(1) - (T - d) / ((p.gamma - Num(1)) * d));
}

template <class Num>
Num tilde_value_n(const ScheduleParams<Num>& p, const Num& z_ddl) {
    if (z_ddl >= p.workload) return p.value;
    const Num rem = p.workload - z_ddl;
    const Num rate = p.mu_up * throughput_n(p, p.n_max);
    const Num t_rem = rem / rate;
    const Num completion = Num(p.deadline) + t_rem;
    return value_at_n(p, completion) - t_rem * Num(p.n_max) * p.od_price;
}

template <class Num>
struct ReplayResult {
    Num z_ddl{};
    Num cost{};
    Num utility{};
};

// Recomputes progress, cost and utility from a full allocation sequence.
// Slots beyond the sequence are idle; prices[i] is the spot price of the
// i-th executed slot.
template <class Num>
ReplayResult<Num> replay_allocations(const ScheduleParams<Num>& p,
                                     std::span<const Allocation> allocations,
                                     std::span<const Num> prices, Num z0 = Num(0),
                                     int prev_total0 = 0) {
    Num z = z0;
    Num cost(0);
    int prev = prev_total0;
    for (std::size_t i = 0; i < allocations.size(); ++i) {
        const Allocation& a = allocations[i];
        const int total = a.total();
        if (total > 0)
            z = z + effective_fraction_n(p, total, prev) * throughput_n(p, total);
        cost = cost + Num(a.n_od) * p.od_price + Num(a.n_spot) * prices[i];
        prev = total;
    }
    return {z, cost, tilde_value_n(p, z) - cost};
}

}  // namespace spotsched

#endif
