#include "spotsched/selector.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "spotsched/common.hpp"

namespace spotsched {

namespace {

constexpr double kWeightFloor = 1e-30;

}  // namespace

WeightVector init_weights(int m) {
    if (m < 1) throw ConfigError("init_weights: pool must contain at least one policy");
    return WeightVector(static_cast<std::size_t>(m), 1.0 / m);
}

WeightVector update_weights(const WeightVector& w, const std::vector<double>& u, double eta) {
    if (w.size() != u.size())
        throw ConfigError("update_weights: weight and utility lengths differ");
    const double u_max = *std::max_element(u.begin(), u.end());
    WeightVector next(w.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        next[i] = w[i] * std::exp(eta * (u[i] - u_max));
        sum += next[i];
    }
    for (double& x : next) x = std::max(x / sum, kWeightFloor);
    return next;
}

double normalize_utility(double raw, double u_min, double u_max) {
    if (u_min >= u_max)
        throw ConfigError("normalize_utility: bounds must satisfy u_min < u_max");
    return (std::clamp(raw, u_min, u_max) - u_min) / (u_max - u_min);
}

double default_utility_max(const JobSpec& job) { return job.value; }

double default_utility_min(const JobSpec& job, double od_price) {
    return -static_cast<double>(job.deadline) * job.n_max * od_price;
}

double learning_rate(int m, int k_total) {
    if (m < 1 || k_total < 1)
        throw ConfigError("learning_rate: pool size and iterations must be positive");
    return std::sqrt(2.0 * std::log(static_cast<double>(m)) / k_total);
}

int select_policy(const WeightVector& w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return select_policy(w, rng);
}

int select_policy(const WeightVector& w, std::mt19937_64& rng) {
    if (w.empty()) throw ConfigError("select_policy: empty weight vector");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
}

double expected_utility(const IterationRecord& rec) {
    double dot = 0.0;
    for (std::size_t i = 0; i < rec.weights.size(); ++i)
        dot += rec.weights[i] * rec.utilities[i];
    return dot;
}

SelectionRun run_selection(int pool_size, int jobs, std::optional<double> eta,
                           std::uint64_t seed,
                           const std::function<std::vector<double>(int)>& utilities_for_job) {
    if (jobs < 1) throw ConfigError("run_selection: need at least one job");

    SelectionRun run;
    run.jobs = jobs;
    run.pool_size = pool_size;
    run.eta = eta.value_or(learning_rate(pool_size, jobs));
    run.seed = seed;
    run.history.reserve(static_cast<std::size_t>(jobs));

    WeightVector w = init_weights(pool_size);
    std::mt19937_64 rng(seed);
    for (int k = 1; k <= jobs; ++k) {
        std::vector<double> u = utilities_for_job(k);
        if (static_cast<int>(u.size()) != pool_size)
            throw ConfigError("run_selection: utility vector size mismatch at iteration " +
                              std::to_string(k));
        IterationRecord rec{k, select_policy(w, rng), w, u};
        run.history.push_back(std::move(rec));
        w = update_weights(w, u, run.eta);
    }
    run.final_weights = std::move(w);
    return run;
}

double regret(const SelectionRun& run) {
    if (run.history.empty()) return 0.0;
    const std::size_t m = run.history.front().utilities.size();
    std::vector<double> totals(m, 0.0);
    double expected = 0.0;
    for (const IterationRecord& rec : run.history) {
        for (std::size_t i = 0; i < m; ++i) totals[i] += rec.utilities[i];
        expected += expected_utility(rec);
    }
    return *std::max_element(totals.begin(), totals.end()) - expected;
}

double regret_bound(int jobs, int pool_size) {
    return std::sqrt(2.0 * jobs * std::log(static_cast<double>(pool_size)));
}

void write_history_jsonl(const SelectionRun& run, std::ostream& out) {
    for (const IterationRecord& rec : run.history) {
        out << "{\"k\":" << rec.k << ",\"chosen\":" << rec.chosen
            << ",\"eta\":" << format_double(run.eta) << ",\"weights\":[";
        for (std::size_t i = 0; i < rec.weights.size(); ++i) {
            if (i) out << ',';
            out << format_double(rec.weights[i]);
        }
        out << "],\"utilities\":[";
        for (std::size_t i = 0; i < rec.utilities.size(); ++i) {
            if (i) out << ',';
            out << format_double(rec.utilities[i]);
        }
        out << "]}\n";
    }
}

}  // namespace spotsched
