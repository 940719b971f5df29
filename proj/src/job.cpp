#include "spotsched/job.hpp"

#include "spotsched/common.hpp"

namespace spotsched {

void validate_job(const JobSpec& job) {
    // A zero workload is the degenerate already-complete job.
    if (job.workload < 0.0) throw ConfigError("job: workload must be nonnegative");
    if (job.deadline < 1) throw ConfigError("job: deadline must be at least 1 slot");
    if (job.n_min < 1) throw ConfigError("job: n_min must be at least 1");
    if (job.n_min > job.n_max) throw ConfigError("job: n_min must not exceed n_max");
    if (job.value <= 0.0) throw ConfigError("job: value must be positive");
    if (job.gamma <= 1.0) throw ConfigError("job: gamma must exceed 1");
}

void validate_throughput(const ThroughputModel& tp, const JobSpec& job) {
    if (tp.alpha <= 0.0) throw ConfigError("throughput: alpha must be positive");
    if (tp.alpha * job.n_min + tp.beta <= 0.0)
        throw ConfigError("throughput: a running job must make progress (alpha*n_min + beta > 0)");
}

void validate_overhead(const OverheadModel& ov) {
    if (ov.mu_up <= 0.0 || ov.mu_up > 1.0)
        throw ConfigError("overhead: mu_up must be in (0, 1]");
    if (ov.mu_down <= 0.0 || ov.mu_down > 1.0)
        throw ConfigError("overhead: mu_down must be in (0, 1]");
    if (ov.mu_up > ov.mu_down)
        throw ConfigError("overhead: mu_up must not exceed mu_down");
}

ScheduleParams<double> make_params(const JobSpec& job, const ThroughputModel& tp,
                                   const OverheadModel& ov, double od_price) {
    return {job.workload, job.value, job.gamma, tp.alpha,    tp.beta,  ov.mu_up,
            ov.mu_down,   od_price,  job.deadline, job.n_min, job.n_max};
}

ScheduleParams<Rational> make_exact_params(const JobSpec& job, const ThroughputModel& tp,
                                           const OverheadModel& ov, double od_price) {
    return {Rational::from_decimal(job.workload),
            Rational::from_decimal(job.value),
            Rational::from_decimal(job.gamma),
            Rational::from_decimal(tp.alpha),
            Rational::from_decimal(tp.beta),
            Rational::from_decimal(ov.mu_up),
            Rational::from_decimal(ov.mu_down),
            Rational::from_decimal(od_price),
            job.deadline,
            job.n_min,
            job.n_max};
}

double throughput(const ThroughputModel& tp, int n) {
    if (n <= 0) return 0.0;
    return tp.alpha * n + tp.beta;
}

double effective_fraction(const OverheadModel& ov, int n_now, int n_prev) {
    if (n_now > n_prev) return ov.mu_up;
    if (n_now < n_prev) return ov.mu_down;
    return 1.0;
}

double value_at(const JobSpec& job, double T) {
    const double d = job.deadline;
    if (T <= d) return job.value;
    if (T >= job.gamma * d) return 0.0;
    return job.value * (1.0 - (T - d) / ((job.gamma - 1.0) * d));
}

double expected_progress(const JobSpec& job, int t) {
    return job.workload / job.deadline * t;
}

double tilde_value(const JobSpec& job, const ThroughputModel& tp, const OverheadModel& ov,
                   double od_price, double z_ddl) {
    return tilde_value_n(make_params(job, tp, ov, od_price), z_ddl);
}

double utility(const JobSpec& job, const ThroughputModel& tp, const OverheadModel& ov,
               double od_price, double z_ddl, double cost_ddl) {
    return tilde_value(job, tp, ov, od_price, z_ddl) - cost_ddl;
}

ProgressState step(const ProgressState& state, const Allocation& alloc, double slot_price,
                   double od_price, const ThroughputModel& tp, const OverheadModel& ov) {
    ProgressState next = state;
    const int total = alloc.total();
    if (total > 0)
        next.progress += effective_fraction(ov, total, state.prev_total) * throughput(tp, total);
    next.accrued_cost += alloc.n_od * od_price + alloc.n_spot * slot_price;
    next.prev_total = total;
    next.slot = state.slot + 1;
    return next;
}

}  // namespace spotsched
