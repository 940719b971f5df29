#include "spotsched/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "spotsched/common.hpp"
#include "spotsched/optimizer.hpp"

namespace spotsched {

namespace {

int ahap_omega(const PolicySpec& policy) {
    const auto* a = std::get_if<AhapSpec>(&policy);
    return a ? a->omega : 0;
}

Forecast make_forecast(const SpotTrace& trace, int abs_slot, int horizon,
                       const ForecasterConfig& fc) {
    if (fc.kind == ForecasterKind::Ar) {
        try {
            return predict_ar(trace, abs_slot, horizon, fc.order);
        } catch (const InsufficientHistoryError&) {
            return persistence_forecast(trace, abs_slot, horizon);
        }
    }
    return predict_noisy_oracle(trace, abs_slot, horizon, fc.noise);
}

SpotTrace scale_avail(const SpotTrace& trace, double factor) {
    SpotTrace out = trace;
    for (auto& s : out.slots)
        s.spot_avail = static_cast<int>(std::max<long long>(0, round_half_up(s.spot_avail * factor)));
    return out;
}

SpotTrace scale_price(const SpotTrace& trace, double factor) {
    SpotTrace out = trace;
    for (auto& s : out.slots) s.spot_price = std::max(0.0, s.spot_price * factor);
    return out;
}

int max_pool_omega(const std::vector<PolicySpec>& pool) {
    int omega = 0;
    for (const auto& p : pool) omega = std::max(omega, ahap_omega(p));
    return omega;
}

int draw_start_slot(const SpotTrace& trace, int deadline, int omega, std::mt19937_64& rng) {
    const int hi = trace.size() - deadline - omega - 1;
    if (hi < 0)
        throw ConfigError("trace of " + std::to_string(trace.size()) +
                          " slots is too short for deadline " + std::to_string(deadline) +
                          " plus forecast window " + std::to_string(omega));
    std::uniform_int_distribution<int> dist(0, hi);
    return dist(rng);
}

// Runs every pool policy on one job; `threads` > 1 splits the pool.
std::vector<double> simulate_pool(const std::vector<PolicySpec>& pool, const JobSpec& job,
                                  const SpotTrace& trace, const ForecasterConfig& fc,
                                  const ThroughputModel& tp, const OverheadModel& ov,
                                  double od_price, int start_slot, int k, int threads) {
    const int m_total = static_cast<int>(pool.size());
    std::vector<double> utilities(static_cast<std::size_t>(m_total), 0.0);
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&](int lo, int hi) {
        for (int m = lo; m < hi; ++m) {
            try {
                utilities[static_cast<std::size_t>(m)] =
                    run_job(pool[static_cast<std::size_t>(m)], job, trace, fc, tp, ov,
                            od_price, start_slot)
                        .utility_norm;
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const int n_threads = std::clamp(threads, 1, m_total);
    if (n_threads == 1) {
        worker(0, m_total);
    } else {
        std::vector<std::thread> crew;
        const int chunk = (m_total + n_threads - 1) / n_threads;
        for (int i = 0; i < n_threads; ++i)
            crew.emplace_back(worker, i * chunk, std::min(m_total, (i + 1) * chunk));
        for (auto& th : crew) th.join();
    }

    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const std::exception& e) {
            throw ConfigError("simulation failed at job " + std::to_string(k) + ": " +
                              e.what());
        }
    }
    return utilities;
}

std::string allocations_field(const std::vector<Allocation>& allocations) {
    std::string out;
    for (std::size_t i = 0; i < allocations.size(); ++i) {
        if (i) out += '|';
        out += std::to_string(allocations[i].n_od) + ':' + std::to_string(allocations[i].n_spot);
    }
    return out;
}

MagnitudeMode parse_mode(const std::string& s) {
    if (s == "mag_dep") return MagnitudeMode::MagnitudeDependent;
    if (s == "fixed_mag") return MagnitudeMode::FixedMagnitude;
    throw ConfigError("unknown magnitude mode '" + s + "' (mag_dep | fixed_mag)");
}

NoiseDistribution parse_distribution(const std::string& s) {
    if (s == "uniform") return NoiseDistribution::Uniform;
    if (s == "heavy_tail") return NoiseDistribution::HeavyTail;
    throw ConfigError("unknown noise distribution '" + s + "' (uniform | heavy_tail)");
}

std::vector<Experiment::Phase> default_phases(std::uint64_t noise_seed) {
    auto phase = [&](int end, NoiseDistribution dist, double level, int idx) {
        Experiment::Phase p;
        p.end_iteration = end;
        p.noise = {MagnitudeMode::FixedMagnitude, dist, level, mix64(noise_seed, 7000u + idx)};
        return p;
    };
    return {phase(800, NoiseDistribution::Uniform, 0.10, 0),
            phase(1600, NoiseDistribution::HeavyTail, 0.30, 1),
            phase(2400, NoiseDistribution::Uniform, 0.50, 2),
            phase(3600, NoiseDistribution::Uniform, 2.00, 3)};
}

}  // namespace

JobResult run_job(const PolicySpec& policy, const JobSpec& job, const SpotTrace& trace,
                  const ForecasterConfig& forecaster, const ThroughputModel& tp,
                  const OverheadModel& ov, double od_price, int start_slot,
                  bool exact_window) {
    validate_job(job);
    validate_throughput(tp, job);
    validate_overhead(ov);
    if (od_price <= 0.0) throw ConfigError("run_job: on-demand price must be positive");

    const int omega = ahap_omega(policy);
    int last_needed = start_slot + job.deadline - 1;
    if (omega > 0 && forecaster.kind == ForecasterKind::NoisyOracle) last_needed += omega;
    if (start_slot < 0 || last_needed >= trace.size())
        throw ConfigError("run_job: trace exhausted, need slots [" +
                          std::to_string(start_slot) + ", " + std::to_string(last_needed) +
                          "] of " + std::to_string(trace.size()));

    AhapState ahap_state;
    if (const auto* a = std::get_if<AhapSpec>(&policy)) {
        ahap_state.commit = a->commit;
        ahap_state.exact_arithmetic = exact_window;
    }

    JobResult result;
    result.policy = format_policy(policy);
    result.start_slot = start_slot;

    ProgressState state;
    int prev_avail = 0;
    for (int t = 1; t <= job.deadline; ++t) {
        if (state.progress >= job.workload - kCompletionTol) break;
        const MarketSlot& slot = trace.at(start_slot + t - 1);
        Observation obs{t, slot.spot_price, slot.spot_avail, state};

        Allocation alloc;
        if (const auto* a = std::get_if<AhapSpec>(&policy)) {
            Forecast f = make_forecast(trace, start_slot + t - 1, a->omega, forecaster);
            f.origin_slot = t;  // rebase to the job clock
            alloc = decide_ahap(*a, ahap_state, obs, f, job, tp, ov, od_price);
        } else if (const auto* h = std::get_if<AhanpSpec>(&policy)) {
            alloc = decide_ahanp(*h, obs, job, tp, ov, od_price, state.prev_total, prev_avail);
        } else if (std::holds_alternative<OdOnlySpec>(policy)) {
            alloc = decide_od_only(obs, job, tp, ov, od_price);
        } else if (std::holds_alternative<MsuSpec>(policy)) {
            alloc = decide_msu(obs, job, tp, ov, od_price);
        } else {
            alloc = decide_up(obs, job, tp, ov, od_price);
        }

        // True availability gates spot regardless of what the forecast said.
        alloc.n_spot = std::min(alloc.n_spot, slot.spot_avail);
        alloc = clamp_allocation(alloc, job.n_min, job.n_max);

        state = step(state, alloc, slot.spot_price, od_price, tp, ov);
        result.allocations.push_back(alloc);
        prev_avail = slot.spot_avail;
        if (state.progress >= job.workload - kCompletionTol) break;
    }

    result.z_ddl = state.progress;
    result.cost = state.accrued_cost;
    result.utility_raw = utility(job, tp, ov, od_price, result.z_ddl, result.cost);
    result.utility_norm = normalize_utility(result.utility_raw,
                                            default_utility_min(job, od_price),
                                            default_utility_max(job));
    if (state.progress >= job.workload - kCompletionTol) {
        result.completion_slot = static_cast<double>(result.allocations.size());
    } else {
        const double rate = ov.mu_up * throughput(tp, job.n_max);
        result.completion_slot = job.deadline + (job.workload - state.progress) / rate;
    }
    return result;
}

bool audit_allocations(const JobResult& result, const SpotTrace& trace, const JobSpec& job) {
    for (std::size_t i = 0; i < result.allocations.size(); ++i) {
        const Allocation& a = result.allocations[i];
        const MarketSlot& slot = trace.at(result.start_slot + static_cast<int>(i));
        if (a.n_od < 0 || a.n_spot < 0) return false;
        if (a.n_spot > slot.spot_avail) return false;
        const int total = a.total();
        if (total != 0 && (total < job.n_min || total > job.n_max)) return false;
    }
    return true;
}

JobSpec draw_job(const JobDistribution& dist, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> workload(dist.workload_min, dist.workload_max);
    std::uniform_int_distribution<int> n_min(dist.n_min_low, dist.n_min_high);
    std::uniform_int_distribution<int> n_max(dist.n_max_low, dist.n_max_high);
    JobSpec job;
    job.workload = workload(rng);
    job.deadline = dist.deadline;
    job.n_min = n_min(rng);
    job.n_max = n_max(rng);
    job.value = dist.value;
    job.gamma = dist.gamma;
    return job;
}

Experiment load_experiment(const ConfigFile& cfg) {
    Experiment exp;

    exp.job.workload = cfg.get_double("job", "workload", exp.job.workload);
    exp.job.deadline = cfg.get_int("job", "deadline", exp.job.deadline);
    exp.job.n_min = cfg.get_int("job", "n_min", exp.job.n_min);
    exp.job.n_max = cfg.get_int("job", "n_max", exp.job.n_max);
    exp.job.value = cfg.get_double("job", "value", exp.job.value);
    exp.job.gamma = cfg.get_double("job", "gamma", exp.job.gamma);

    exp.throughput.alpha = cfg.get_double("throughput", "alpha", exp.throughput.alpha);
    exp.throughput.beta = cfg.get_double("throughput", "beta", exp.throughput.beta);
    exp.overhead.mu_up = cfg.get_double("overhead", "mu_up", exp.overhead.mu_up);
    exp.overhead.mu_down = cfg.get_double("overhead", "mu_down", exp.overhead.mu_down);
    exp.od_price = cfg.get_double("market", "od_price", exp.od_price);

    exp.seed = cfg.get_u64("run", "seed", 1);
    exp.start_slot = cfg.get_int("run", "start_slot", 0);
    exp.threads = cfg.get_int("run", "threads", 1);

    const std::string source = cfg.get_or("trace", "source", "synth");
    if (source == "file") {
        const std::string path = cfg.get("trace", "file");
        std::ifstream in(path);
        if (!in) throw ConfigError("trace file not found: " + path);
        exp.trace = load_trace(in);
        if (cfg.has("trace", "od_reference_price"))
            exp.trace = normalize_trace(exp.trace,
                                        cfg.get_double("trace", "od_reference_price", 1.0),
                                        cfg.get_double("trace", "avail_scale", 1.0),
                                        cfg.get_int("trace", "avail_cap", 16));
    } else if (source == "synth") {
        TraceSynthSpec synth;
        synth.length = cfg.get_int("trace", "length", 2048);
        synth.base_avail = cfg.get_double("trace", "base_avail", 8.0);
        synth.avail_amplitude = cfg.get_double("trace", "avail_amplitude", 4.0);
        synth.base_price = cfg.get_double("trace", "base_price", 0.6);
        synth.price_amplitude = cfg.get_double("trace", "price_amplitude", 0.2);
        synth.jitter = cfg.get_double("trace", "jitter", 0.1);
        synth.seed = cfg.get_u64("trace", "seed", exp.seed);
        exp.trace = synthesize_trace(synth);
    } else {
        throw ConfigError("trace source must be 'file' or 'synth', got '" + source + "'");
    }
    validate_trace(exp.trace);

    const std::string kind = cfg.get_or("forecaster", "kind", "noisy_oracle");
    if (kind == "ar") {
        exp.forecaster.kind = ForecasterKind::Ar;
    } else if (kind == "noisy_oracle") {
        exp.forecaster.kind = ForecasterKind::NoisyOracle;
    } else {
        throw ConfigError("forecaster kind must be 'ar' or 'noisy_oracle', got '" + kind +
                          "'");
    }
    exp.forecaster.order = cfg.get_int("forecaster", "order", 4);
    exp.forecaster.noise.level = cfg.get_double("forecaster", "level", 0.0);
    exp.forecaster.noise.magnitude_mode =
        parse_mode(cfg.get_or("forecaster", "magnitude_mode", "mag_dep"));
    exp.forecaster.noise.distribution =
        parse_distribution(cfg.get_or("forecaster", "distribution", "uniform"));
    exp.forecaster.noise.seed = cfg.get_u64("forecaster", "seed", exp.seed);

    exp.use_pool = cfg.get_bool("policies", "use_pool", false);
    for (const std::string& text : cfg.get_list("policies", "list", ";"))
        exp.policies.push_back(parse_policy(text));
    if (exp.policies.empty() && !exp.use_pool) {
        for (const char* text :
             {"ahap:w=3,v=1,s=0.7", "ahanp:s=0.7", "od", "msu", "up"})
            exp.policies.push_back(parse_policy(text));
    }

    exp.jobs.workload_min = cfg.get_int("jobs", "workload_min", exp.jobs.workload_min);
    exp.jobs.workload_max = cfg.get_int("jobs", "workload_max", exp.jobs.workload_max);
    exp.jobs.deadline = cfg.get_int("jobs", "deadline", exp.job.deadline);
    exp.jobs.n_min_low = cfg.get_int("jobs", "n_min_low", exp.jobs.n_min_low);
    exp.jobs.n_min_high = cfg.get_int("jobs", "n_min_high", exp.jobs.n_min_high);
    exp.jobs.n_max_low = cfg.get_int("jobs", "n_max_low", exp.jobs.n_max_low);
    exp.jobs.n_max_high = cfg.get_int("jobs", "n_max_high", exp.jobs.n_max_high);
    exp.jobs.value = cfg.get_double("jobs", "value", exp.job.value);
    exp.jobs.gamma = cfg.get_double("jobs", "gamma", exp.job.gamma);

    exp.select_jobs = cfg.get_int("select", "jobs", exp.select_jobs);
    if (cfg.has("select", "eta") && cfg.get("select", "eta") != "auto")
        exp.eta = cfg.get_double("select", "eta", 0.0);

    const std::string sweep_kind = cfg.get_or("sweep", "kind", "deadline");
    if (sweep_kind == "deadline") {
        exp.sweep_kind = SweepKind::Deadline;
    } else if (sweep_kind == "overhead") {
        exp.sweep_kind = SweepKind::Overhead;
    } else if (sweep_kind == "avail") {
        exp.sweep_kind = SweepKind::Avail;
    } else if (sweep_kind == "price") {
        exp.sweep_kind = SweepKind::Price;
    } else {
        throw ConfigError("sweep kind must be deadline|overhead|avail|price, got '" +
                          sweep_kind + "'");
    }
    for (const std::string& v : cfg.get_list("sweep", "values")) {
        double value = 0.0;
        std::size_t pos = 0;
        value = std::stod(v, &pos);
        if (pos != v.size())
            throw ConfigError("sweep value is not a number: '" + v + "'");
        exp.sweep_values.push_back(value);
    }
    exp.sweep_runs = cfg.get_int("sweep", "runs", exp.sweep_runs);

    if (cfg.has("phases", "list")) {
        int idx = 0;
        for (const std::string& item : cfg.get_list("phases", "list", ";")) {
            std::istringstream ss(item);
            std::string end_text, mode_text, dist_text, level_text;
            if (!std::getline(ss, end_text, ':') || !std::getline(ss, mode_text, ':') ||
                !std::getline(ss, dist_text, ':') || !std::getline(ss, level_text))
                throw ConfigError("phase entry must be end:mode:dist:level, got '" + item +
                                  "'");
            Experiment::Phase phase;
            phase.end_iteration = std::stoi(end_text);
            phase.noise.magnitude_mode = parse_mode(mode_text);
            phase.noise.distribution = parse_distribution(dist_text);
            phase.noise.level = std::stod(level_text);
            phase.noise.seed = mix64(exp.forecaster.noise.seed, 7000u + idx++);
            exp.phases.push_back(phase);
        }
    } else {
        exp.phases = default_phases(exp.forecaster.noise.seed);
    }
    for (std::size_t i = 1; i < exp.phases.size(); ++i)
        if (exp.phases[i].end_iteration <= exp.phases[i - 1].end_iteration)
            throw ConfigError("phase boundaries must be strictly increasing");

    return exp;
}

std::vector<SweepRow> run_sweep(const Experiment& exp) {
    if (exp.sweep_values.empty()) throw ConfigError("sweep: no values configured");
    if (exp.policies.empty()) throw ConfigError("sweep: no policies configured");
    if (exp.sweep_runs < 1) throw ConfigError("sweep: runs must be at least 1");

    const int omega = max_pool_omega(exp.policies);
    std::vector<SweepRow> rows;

    for (double value : exp.sweep_values) {
        Experiment point = exp;
        std::string param;
        switch (exp.sweep_kind) {
            case SweepKind::Deadline:
                param = "deadline";
                point.jobs.deadline = static_cast<int>(value);
                break;
            case SweepKind::Overhead:
                param = "overhead_mu";
                point.overhead.mu_up = value;
                point.overhead.mu_down = value;
                break;
            case SweepKind::Avail:
                param = "avail_scale";
                point.trace = scale_avail(exp.trace, value);
                break;
            case SweepKind::Price:
                param = "price_scale";
                point.trace = scale_price(exp.trace, value);
                break;
        }

        for (const PolicySpec& policy : exp.policies) {
            double sum = 0.0, sum_sq = 0.0;
            for (int rep = 0; rep < exp.sweep_runs; ++rep) {
                // Seeds depend only on the rep so draws pair across sweep
                // values and policies.
                std::mt19937_64 rng(mix64(exp.seed, 20000u + static_cast<unsigned>(rep)));
                JobSpec job = draw_job(point.jobs, rng);
                int start = draw_start_slot(point.trace, job.deadline, omega, rng);
                ForecasterConfig fc = point.forecaster;
                fc.noise.seed = mix64(fc.noise.seed, 40000u + static_cast<unsigned>(rep));
                double u = run_job(policy, job, point.trace, fc, point.throughput,
                                   point.overhead, point.od_price, start)
                               .utility_norm;
                sum += u;
                sum_sq += u * u;
            }
            const double n = exp.sweep_runs;
            const double mean = sum / n;
            double stderr_mean = 0.0;
            if (exp.sweep_runs > 1) {
                double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
                stderr_mean = std::sqrt(var / n);
            }
            rows.push_back({param, value, format_policy(policy), mean, stderr_mean,
                            exp.sweep_runs});
        }
    }
    return rows;
}

SelectionRun run_pool_selection(const Experiment& exp) {
    const std::vector<PolicySpec> pool =
        exp.use_pool || exp.policies.empty() ? build_policy_pool() : exp.policies;
    const int omega = max_pool_omega(pool);

    auto provider = [&](int k) {
        std::mt19937_64 rng(mix64(exp.seed, 10000u + static_cast<unsigned>(k)));
        JobSpec job = draw_job(exp.jobs, rng);
        int start = draw_start_slot(exp.trace, job.deadline, omega, rng);
        ForecasterConfig fc = exp.forecaster;
        fc.noise.seed = mix64(fc.noise.seed, static_cast<unsigned>(k));
        return simulate_pool(pool, job, exp.trace, fc, exp.throughput, exp.overhead,
                             exp.od_price, start, k, exp.threads);
    };
    return run_selection(static_cast<int>(pool.size()), exp.select_jobs, exp.eta,
                         mix64(exp.seed, 1), provider);
}

AdaptResult run_adapt_phases(const Experiment& exp) {
    if (exp.phases.empty()) throw ConfigError("adapt: phase list is empty");
    if (exp.phases.front().end_iteration < 1)
        throw ConfigError("adapt: first phase must end at iteration 1 or later");
    for (std::size_t i = 1; i < exp.phases.size(); ++i)
        if (exp.phases[i].end_iteration <= exp.phases[i - 1].end_iteration)
            throw ConfigError("adapt: phase boundaries must be strictly increasing");
    const std::vector<PolicySpec> pool =
        exp.use_pool || exp.policies.empty() ? build_policy_pool() : exp.policies;
    const int omega = max_pool_omega(pool);
    const int total = exp.phases.back().end_iteration;

    auto noise_for = [&](int k) {
        for (const auto& phase : exp.phases)
            if (k <= phase.end_iteration) return phase.noise;
        return exp.phases.back().noise;
    };

    auto provider = [&](int k) {
        std::mt19937_64 rng(mix64(exp.seed, 10000u + static_cast<unsigned>(k)));
        JobSpec job = draw_job(exp.jobs, rng);
        int start = draw_start_slot(exp.trace, job.deadline, omega, rng);
        ForecasterConfig fc = exp.forecaster;
        fc.kind = ForecasterKind::NoisyOracle;
        fc.noise = noise_for(k);
        fc.noise.seed = mix64(fc.noise.seed, static_cast<unsigned>(k));
        return simulate_pool(pool, job, exp.trace, fc, exp.throughput, exp.overhead,
                             exp.od_price, start, k, exp.threads);
    };

    AdaptResult result;
    result.run = run_selection(static_cast<int>(pool.size()), total, exp.eta,
                               mix64(exp.seed, 1), provider);
    for (const auto& phase : exp.phases) {
        const int end = phase.end_iteration;
        const std::vector<double>& w =
            end < total ? result.run.history[static_cast<std::size_t>(end)].weights
                        : result.run.final_weights;
        int argmax = static_cast<int>(std::max_element(w.begin(), w.end()) - w.begin());
        result.phase_argmax.emplace_back(end, argmax);
    }
    return result;
}

void write_job_results_csv(const std::vector<JobResult>& results, std::ostream& out) {
    out << "policy,utility_raw,utility_norm,completion_slot,cost,z_ddl,start_slot,allocations\n";
    for (const JobResult& r : results)
        out << r.policy << ',' << format_double(r.utility_raw) << ','
            << format_double(r.utility_norm) << ',' << format_double(r.completion_slot)
            << ',' << format_double(r.cost) << ',' << format_double(r.z_ddl) << ','
            << r.start_slot << ',' << allocations_field(r.allocations) << '\n';
}

void write_job_results_jsonl(const std::vector<JobResult>& results, std::ostream& out) {
    for (const JobResult& r : results) {
        out << "{\"policy\":\"" << r.policy << "\",\"utility_raw\":"
            << format_double(r.utility_raw) << ",\"utility_norm\":"
            << format_double(r.utility_norm) << ",\"completion_slot\":"
            << format_double(r.completion_slot) << ",\"cost\":" << format_double(r.cost)
            << ",\"z_ddl\":" << format_double(r.z_ddl) << ",\"start_slot\":" << r.start_slot
            << ",\"allocations\":[";
        for (std::size_t i = 0; i < r.allocations.size(); ++i) {
            if (i) out << ',';
            out << '[' << r.allocations[i].n_od << ',' << r.allocations[i].n_spot << ']';
        }
        out << "]}\n";
    }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "sweep_param,sweep_value,policy,mean_utility,stderr,runs\n";
    for (const SweepRow& r : rows)
        out << r.sweep_param << ',' << format_double(r.sweep_value) << ',' << r.policy << ','
            << format_double(r.mean_utility) << ',' << format_double(r.stderr_mean) << ','
            << r.runs << '\n';
}

}  // namespace spotsched
