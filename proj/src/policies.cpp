#include "spotsched/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "spotsched/common.hpp"
#include "spotsched/optimizer.hpp"

namespace spotsched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_number(std::string_view text, std::string_view whole) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ParseError("policy '" + std::string(whole) + "': bad number '" +
                         std::string(text) + "'");
    return value;
}

std::string_view expect_key(std::string_view field, std::string_view key,
                            std::string_view whole) {
    if (field.size() < key.size() + 2 || field.substr(0, key.size()) != key ||
        field[key.size()] != '=')
        throw ParseError("policy '" + std::string(whole) + "': expected '" +
                         std::string(key) + "=...'");
    return field.substr(key.size() + 1);
}

// Smallest count in [n_min, n_max] that finishes `remaining` within `slots`
// slots, charging one start-up slot at mu_up; n_max when none suffices.
int min_feasible_count(double remaining, int slots, const JobSpec& job,
                       const ThroughputModel& tp, const OverheadModel& ov) {
    if (slots < 1) slots = 1;
    for (int n = job.n_min; n <= job.n_max; ++n) {
        double capacity = (ov.mu_up + (slots - 1)) * throughput(tp, n);
        if (capacity >= remaining - kCompletionTol) return n;
    }
    return job.n_max;
}

}  // namespace

std::string format_policy(const PolicySpec& spec) {
    struct Formatter {
        std::string operator()(const AhapSpec& s) const {
            return "ahap:w=" + std::to_string(s.omega) + ",v=" + std::to_string(s.commit) +
                   ",s=" + format_double(s.sigma);
        }
        std::string operator()(const AhanpSpec& s) const {
            return "ahanp:s=" + format_double(s.sigma);
        }
        std::string operator()(const OdOnlySpec&) const { return "od"; }
        std::string operator()(const MsuSpec&) const { return "msu"; }
        std::string operator()(const UpSpec&) const { return "up"; }
    };
    return std::visit(Formatter{}, spec);
}

PolicySpec parse_policy(std::string_view text) {
    if (text == "od") return OdOnlySpec{};
    if (text == "msu") return MsuSpec{};
    if (text == "up") return UpSpec{};

    if (text.rfind("ahap:", 0) == 0) {
        std::string_view rest = text.substr(5);
        std::size_t c1 = rest.find(',');
        std::size_t c2 = c1 == std::string_view::npos ? std::string_view::npos
                                                      : rest.find(',', c1 + 1);
        if (c1 == std::string_view::npos || c2 == std::string_view::npos)
            throw ParseError("policy '" + std::string(text) + "': expected w=,v=,s= fields");
        AhapSpec s;
        s.omega = static_cast<int>(parse_number(expect_key(rest.substr(0, c1), "w", text), text));
        s.commit = static_cast<int>(
            parse_number(expect_key(rest.substr(c1 + 1, c2 - c1 - 1), "v", text), text));
        s.sigma = parse_number(expect_key(rest.substr(c2 + 1), "s", text), text);
        validate_policy(PolicySpec{s});
        return s;
    }

    if (text.rfind("ahanp:", 0) == 0) {
        AhanpSpec s;
        s.sigma = parse_number(expect_key(text.substr(6), "s", text), text);
        validate_policy(PolicySpec{s});
        return s;
    }

    throw ParseError("unknown policy '" + std::string(text) + "'");
}

void validate_policy(const PolicySpec& spec) {
    if (const auto* a = std::get_if<AhapSpec>(&spec)) {
        if (a->omega < 1) throw ConfigError("ahap: omega must be at least 1");
        if (a->commit < 1 || a->commit > a->omega)
            throw ConfigError("ahap: commit level must satisfy 1 <= v <= omega");
        if (a->sigma < 0.0 || a->sigma > 1.0)
            throw ConfigError("ahap: sigma must lie in [0, 1]");
    } else if (const auto* h = std::get_if<AhanpSpec>(&spec)) {
        if (h->sigma <= 0.0 || h->sigma > 1.0)
            throw ConfigError("ahanp: sigma must lie in (0, 1]");
    }
}

std::vector<PolicySpec> build_policy_pool() {
    std::vector<PolicySpec> pool;
    pool.reserve(112);
    for (int omega = 1; omega <= 5; ++omega)
        for (int commit = 1; commit <= omega; ++commit)
            for (int s = 3; s <= 9; ++s)
                pool.push_back(AhapSpec{omega, commit, s / 10.0});
    for (int s = 3; s <= 9; ++s) pool.push_back(AhanpSpec{s / 10.0});
    return pool;
}

Allocation clamp_allocation(Allocation a, int n_min, int n_max) {
    int total = a.total();
    if (total == 0) return a;
    if (total < n_min) {
        a.n_od += n_min - total;
        return a;
    }
    if (total > n_max) {
        int excess = total - n_max;
        int cut = std::min(a.n_od, excess);
        a.n_od -= cut;
        a.n_spot -= excess - cut;
    }
    return a;
}

Allocation decide_ahap(const AhapSpec& spec, AhapState& state, const Observation& obs,
                       const Forecast& forecast, const JobSpec& job,
                       const ThroughputModel& tp, const OverheadModel& ov, double od_price) {
    if (forecast.horizon != spec.omega)
        throw ConfigError("decide_ahap: forecast horizon " +
                          std::to_string(forecast.horizon) + " does not match omega " +
                          std::to_string(spec.omega));

    const int t = obs.slot;
    StoredPlan plan;
    plan.origin_slot = t;

    if (obs.progress.progress >= expected_progress(job, t + spec.omega)) {
        // Ahead of schedule: greedily take spot below the price threshold.
        for (int tau = 0; tau <= spec.omega; ++tau) {
            bool cheap = forecast.price_at(tau) <= spec.sigma * od_price &&
                         forecast.avail_at(tau) >= job.n_min;
            plan.allocations.push_back(
                cheap ? Allocation{0, std::min(forecast.avail_at(tau), job.n_max)}
                      : Allocation{});
        }
    } else {
        WindowProblem problem{t, spec.omega, obs.progress, forecast, job, tp, ov, od_price};
        plan.allocations = state.exact_arithmetic ? solve_window_exact(problem).allocations
                                                  : solve_window(problem).allocations;
    }

    state.plans.push_back(std::move(plan));
    while (static_cast<int>(state.plans.size()) > state.commit) state.plans.pop_front();

    long long sum_od = 0, sum_spot = 0, present = 0;
    for (const StoredPlan& p : state.plans) {
        int idx = t - p.origin_slot;
        if (idx < 0 || idx >= static_cast<int>(p.allocations.size())) continue;
        sum_od += p.allocations[static_cast<std::size_t>(idx)].n_od;
        sum_spot += p.allocations[static_cast<std::size_t>(idx)].n_spot;
        ++present;
    }

    Allocation a;
    if (present > 0) {
        if (state.aggregate == AhapAggregate::Mean) {
            a.n_od = div_round_half_up(sum_od, present);
            a.n_spot = div_round_half_up(sum_spot, present);
        } else {
            a.n_od = static_cast<int>(sum_od);
            a.n_spot = static_cast<int>(sum_spot);
        }
    }
    a.n_spot = std::min(a.n_spot, obs.spot_avail);
    return clamp_allocation(a, job.n_min, job.n_max);
}

Allocation decide_ahanp(const AhanpSpec& spec, const Observation& obs, const JobSpec& job,
                        const ThroughputModel& tp, const OverheadModel& ov, double od_price,
                        int prev_total, int prev_avail) {
    (void)tp;
    (void)ov;
    const int t = obs.slot;
    const double z_exp_prev = expected_progress(job, t - 1);
    const double z_ratio = z_exp_prev > 0.0 ? obs.progress.progress / z_exp_prev : kInf;
    const double p_ratio =
        spec.sigma > 0.0 ? obs.spot_price / (spec.sigma * od_price) : kInf;
    const double n_ratio =
        prev_avail > 0 ? static_cast<double>(obs.spot_avail) / prev_avail : kInf;

    int total = 0;
    if (z_ratio >= 1.0) {
        if (n_ratio == 0.0) {
            total = 0;
        } else if (n_ratio <= 0.5) {
            total = std::max((prev_total + 1) / 2, job.n_min);
        } else if (n_ratio <= 1.0) {
            total = prev_total;
        } else if (p_ratio > 1.0) {
            total = prev_total;
        } else {
            total = std::max(prev_total, obs.spot_avail);
        }
    } else {
        total = n_ratio == kInf ? job.n_min : 2 * prev_total;
    }

    if (total > 0) total = std::clamp(total, job.n_min, job.n_max);
    int n_spot = std::min(obs.spot_avail, total);
    return {total - n_spot, n_spot};
}

Allocation decide_od_only(const Observation& obs, const JobSpec& job,
                          const ThroughputModel& tp, const OverheadModel& ov,
                          double od_price) {
    (void)od_price;
    const double remaining = job.workload - obs.progress.progress;
    if (remaining <= kCompletionTol) return {};
    const int slots_left = job.deadline - obs.slot + 1;
    return {min_feasible_count(remaining, slots_left, job, tp, ov), 0};
}

Allocation decide_msu(const Observation& obs, const JobSpec& job, const ThroughputModel& tp,
                      const OverheadModel& ov, double od_price) {
    (void)od_price;
    const double remaining = job.workload - obs.progress.progress;
    if (remaining <= kCompletionTol) return {};

    Allocation a{0, std::min(obs.spot_avail, job.n_max)};
    const double future_slack = (job.deadline - obs.slot) * ov.mu_up * throughput(tp, job.n_max);
    if (remaining > future_slack + kCompletionTol) {
        // Deadline pressure: top up with on-demand to a feasible total.
        int needed = min_feasible_count(remaining, job.deadline - obs.slot + 1, job, tp, ov);
        if (needed > a.n_spot) a.n_od = needed - a.n_spot;
    }
    if (a.total() == 0 || a.total() < job.n_min) return {};
    return clamp_allocation(a, job.n_min, job.n_max);
}

Allocation decide_up(const Observation& obs, const JobSpec& job, const ThroughputModel& tp,
                     const OverheadModel& ov, double od_price) {
    (void)od_price;
    if (job.workload - obs.progress.progress <= kCompletionTol) return {};

    const double need = expected_progress(job, obs.slot) - obs.progress.progress;
    if (obs.spot_avail >= job.n_min) {
        if (need <= kCompletionTol) return {};
        const int cap = std::min(obs.spot_avail, job.n_max);
        for (int n = job.n_min; n <= cap; ++n)
            if (ov.mu_up * throughput(tp, n) >= need - kCompletionTol) return {0, n};
        return {0, cap};
    }
    if (need > kCompletionTol) {
        for (int n = job.n_min; n <= job.n_max; ++n)
            if (effective_fraction(ov, n, obs.progress.prev_total) * throughput(tp, n) >=
                need - kCompletionTol)
                return {n, 0};
        return {job.n_max, 0};
    }
    return {};
}

}  // namespace spotsched
