#include "spotsched/optimizer.hpp"

#include <algorithm>
#include <string>

#include "spotsched/common.hpp"

namespace spotsched {

namespace {

// One market slot as seen by the search: price, availability, and whether
// the split rule routes instances to spot (strictly cheaper than on-demand).
template <class Num>
struct SearchSlot {
    Num price{};
    int avail = 0;
    bool spot_cheap = false;
};

template <class Num>
struct Incumbent {
    bool valid = false;
    Num objective{};
    Num cost{};
    long long instance_slots = 0;
    long long od_slots = 0;
    std::vector<int> totals;
};

template <class Num>
struct SearchContext {
    ScheduleParams<Num> params;
    std::vector<SearchSlot<Num>> slots;
    Num h_max{};  // throughput at n_max, the per-slot progress ceiling
    Incumbent<Num> best;
    std::vector<int> current;
};

template <class Num>
Allocation split_total(const SearchSlot<Num>& slot, int total) {
    if (total <= 0) return {};
    int spot = slot.spot_cheap ? std::min(total, slot.avail) : 0;
    return {total - spot, spot};
}

// (objective desc, cost asc, instance-slots asc, od-slots asc); the caller
// keeps the first-found plan among full ties, which DFS order makes the
// lexicographically earliest sequence.
template <class Num>
bool improves(const Incumbent<Num>& best, const Num& obj, const Num& cost,
              long long inst, long long ods) {
    if (!best.valid) return true;
    if (obj != best.objective) return obj > best.objective;
    if (cost != best.cost) return cost < best.cost;
    if (inst != best.instance_slots) return inst < best.instance_slots;
    return ods < best.od_slots;
}

template <class Num>
void search(SearchContext<Num>& ctx, std::size_t i, Num z, int prev, Num cost,
            long long inst, long long ods) {
    if (i == ctx.slots.size()) {
        Num obj = tilde_value_n(ctx.params, z) - cost;
        if (improves(ctx.best, obj, cost, inst, ods)) {
            ctx.best.valid = true;
            ctx.best.objective = obj;
            ctx.best.cost = cost;
            ctx.best.instance_slots = inst;
            ctx.best.od_slots = ods;
            ctx.best.totals = ctx.current;
        }
        return;
    }

    if (ctx.best.valid) {
        // Upper bound: every remaining slot adds full n_max progress for free.
        Num z_ub = z + Num(static_cast<int>(ctx.slots.size() - i)) * ctx.h_max;
        Num ub = tilde_value_n(ctx.params, z_ub) - cost;
        if (ub < ctx.best.objective) return;
        if (ub == ctx.best.objective && cost > ctx.best.cost) return;
    }

    const SearchSlot<Num>& slot = ctx.slots[i];
    for (int total = 0; total <= ctx.params.n_max; ++total) {
        if (total > 0 && total < ctx.params.n_min) continue;
        Allocation a = split_total(slot, total);
        Num dz = total > 0
                     ? effective_fraction_n(ctx.params, total, prev) * throughput_n(ctx.params, total)
                     : Num(0);
        Num dcost = Num(a.n_od) * ctx.params.od_price + Num(a.n_spot) * slot.price;
        ctx.current.push_back(total);
        search(ctx, i + 1, z + dz, total, cost + dcost, inst + total, ods + a.n_od);
        ctx.current.pop_back();
    }
}

template <class Num>
struct SearchOutput {
    std::vector<Allocation> allocations;
    Num objective{};
};

template <class Num>
SearchOutput<Num> run_search(const ScheduleParams<Num>& params,
                             std::vector<SearchSlot<Num>> slots, Num z0, int prev0) {
    SearchContext<Num> ctx;
    ctx.params = params;
    ctx.slots = std::move(slots);
    ctx.h_max = throughput_n(params, params.n_max);
    ctx.current.reserve(ctx.slots.size());
    search(ctx, 0, z0, prev0, Num(0), 0, 0);

    SearchOutput<Num> out;
    out.objective = ctx.best.objective;
    out.allocations.reserve(ctx.best.totals.size());
    for (std::size_t i = 0; i < ctx.best.totals.size(); ++i)
        out.allocations.push_back(split_total(ctx.slots[i], ctx.best.totals[i]));
    return out;
}

template <class Num>
std::vector<SearchSlot<Num>> window_slots(const WindowProblem& p, int eff_horizon,
                                          const ScheduleParams<Num>& params) {
    std::vector<SearchSlot<Num>> slots;
    slots.reserve(static_cast<std::size_t>(eff_horizon) + 1);
    for (int tau = 0; tau <= eff_horizon; ++tau) {
        SearchSlot<Num> s;
        if constexpr (std::is_same_v<Num, Rational>)
            s.price = Rational::from_decimal(p.forecast.price_at(tau));
        else
            s.price = p.forecast.price_at(tau);
        s.avail = p.forecast.avail_at(tau);
        s.spot_cheap = s.price < params.od_price;
        slots.push_back(s);
    }
    return slots;
}

void check_window_problem(const WindowProblem& p, int eff) {
    if (eff < 0)
        throw ConfigError("solve_window: slot " + std::to_string(p.start_slot) +
                          " is past the deadline " + std::to_string(p.job.deadline));
    if (p.forecast.horizon < eff)
        throw ConfigError("solve_window: forecast horizon " +
                          std::to_string(p.forecast.horizon) + " shorter than window " +
                          std::to_string(eff));
}

std::vector<SearchSlot<Rational>> offline_slots(const SpotTrace& trace, const JobSpec& job,
                                                const ScheduleParams<Rational>& params) {
    if (trace.size() < job.deadline)
        throw ConfigError("solve_offline: trace has " + std::to_string(trace.size()) +
                          " slots, deadline needs " + std::to_string(job.deadline));
    std::vector<SearchSlot<Rational>> slots;
    slots.reserve(static_cast<std::size_t>(job.deadline));
    for (int t = 0; t < job.deadline; ++t) {
        SearchSlot<Rational> s;
        s.price = Rational::from_decimal(trace.at(t).spot_price);
        s.avail = trace.at(t).spot_avail;
        s.spot_cheap = s.price < params.od_price;
        slots.push_back(s);
    }
    return slots;
}

constexpr int kOfflineDeadlineCap = 8;

}  // namespace

int effective_horizon(const WindowProblem& p) {
    return std::min(p.horizon, p.job.deadline - p.start_slot);
}

PlanSequence solve_window(const WindowProblem& p) {
    const int eff = effective_horizon(p);
    check_window_problem(p, eff);
    auto params = make_params(p.job, p.throughput, p.overhead, p.od_price);
    auto out = run_search<double>(params, window_slots(p, eff, params), p.state.progress,
                                  p.state.prev_total);
    return {std::move(out.allocations), out.objective};
}

ExactPlanSequence solve_window_exact(const WindowProblem& p) {
    const int eff = effective_horizon(p);
    check_window_problem(p, eff);
    auto params = make_exact_params(p.job, p.throughput, p.overhead, p.od_price);
    auto out = run_search<Rational>(params, window_slots(p, eff, params),
                                    Rational::from_decimal(p.state.progress),
                                    p.state.prev_total);
    return {std::move(out.allocations), out.objective};
}

ExactPlanSequence solve_offline_exact(const SpotTrace& trace, const JobSpec& job,
                                      const ThroughputModel& tp, const OverheadModel& ov,
                                      double od_price) {
    if (job.deadline > kOfflineDeadlineCap)
        throw CapabilityError("solve_offline: exhaustive oracle supports deadlines up to " +
                              std::to_string(kOfflineDeadlineCap) + " slots, got " +
                              std::to_string(job.deadline));
    auto params = make_exact_params(job, tp, ov, od_price);
    auto out = run_search<Rational>(params, offline_slots(trace, job, params), Rational(0), 0);
    return {std::move(out.allocations), out.objective};
}

PlanSequence solve_offline(const SpotTrace& trace, const JobSpec& job,
                           const ThroughputModel& tp, const OverheadModel& ov,
                           double od_price) {
    auto exact = solve_offline_exact(trace, job, tp, ov, od_price);
    return {std::move(exact.allocations), exact.objective.to_double()};
}

}  // namespace spotsched
