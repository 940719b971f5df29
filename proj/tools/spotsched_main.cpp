#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "spotsched/common.hpp"
#include "spotsched/harness.hpp"
#include "spotsched/optimizer.hpp"

namespace {

using namespace spotsched;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::string format = "csv";
};

Experiment load(const GlobalOptions& opts) {
    ConfigFile cfg;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw ConfigError("config file not found: " + opts.config_path);
        cfg = ConfigFile::parse(in);
    } else {
        std::istringstream empty;
        cfg = ConfigFile::parse(empty);
    }
    Experiment exp = load_experiment(cfg);
    if (opts.seed) exp.seed = *opts.seed;
    return exp;
}

// Streams to --out when given, else stdout.
void emit(const GlobalOptions& opts, const std::string& text) {
    if (opts.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + opts.out_path);
    out << text;
}

int run_simulate(const GlobalOptions& opts) {
    Experiment exp = load(opts);
    std::vector<JobResult> results;
    for (const PolicySpec& policy : exp.policies)
        results.push_back(run_job(policy, exp.job, exp.trace, exp.forecaster,
                                  exp.throughput, exp.overhead, exp.od_price,
                                  exp.start_slot));
    std::ostringstream out;
    if (opts.format == "jsonl")
        write_job_results_jsonl(results, out);
    else
        write_job_results_csv(results, out);
    emit(opts, out.str());
    return 0;
}

int run_sweep_cmd(const GlobalOptions& opts) {
    Experiment exp = load(opts);
    std::ostringstream out;
    write_sweep_csv(run_sweep(exp), out);
    emit(opts, out.str());
    return 0;
}

int run_select_cmd(const GlobalOptions& opts) {
    Experiment exp = load(opts);
    SelectionRun run = run_pool_selection(exp);
    std::ostringstream out;
    write_history_jsonl(run, out);
    emit(opts, out.str());

    const auto& w = run.final_weights;
    int best = static_cast<int>(std::max_element(w.begin(), w.end()) - w.begin());
    std::cerr << "selection: K=" << run.jobs << " M=" << run.pool_size
              << " eta=" << format_double(run.eta) << " best_index=" << best + 1
              << " best_weight=" << format_double(w[static_cast<std::size_t>(best)])
              << " regret=" << format_double(regret(run))
              << " bound=" << format_double(regret_bound(run.jobs, run.pool_size)) << "\n";
    return 0;
}

int run_adapt_cmd(const GlobalOptions& opts) {
    Experiment exp = load(opts);
    AdaptResult result = run_adapt_phases(exp);
    std::ostringstream out;
    write_history_jsonl(result.run, out);
    emit(opts, out.str());
    for (const auto& [end, argmax] : result.phase_argmax)
        std::cerr << "phase_end=" << end << " argmax_index=" << argmax + 1 << "\n";
    return 0;
}

int run_oracle(const GlobalOptions& opts) {
    Experiment exp = load(opts);
    SpotTrace window;
    window.on_demand_price = exp.trace.on_demand_price;
    for (int t = 0; t < exp.job.deadline; ++t)
        window.slots.push_back({t, exp.trace.at(exp.start_slot + t).spot_price,
                                exp.trace.at(exp.start_slot + t).spot_avail});

    PlanSequence plan =
        solve_offline(window, exp.job, exp.throughput, exp.overhead, exp.od_price);
    std::ostringstream out;
    out << "slot,n_od,n_spot\n";
    for (std::size_t i = 0; i < plan.allocations.size(); ++i)
        out << i + 1 << ',' << plan.allocations[i].n_od << ',' << plan.allocations[i].n_spot
            << '\n';
    emit(opts, out.str());
    std::cerr << "objective=" << format_double(plan.objective) << "\n";
    return 0;
}

int run_synth(const GlobalOptions& opts) {
    Experiment exp = load(opts);
    std::ostringstream out;
    write_trace_csv(exp.trace, out);
    emit(opts, out.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deadline-aware spot/on-demand scheduling simulator"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "Experiment config file");
    app.add_option("--seed", opts.seed, "Override the run seed");
    app.add_option("--out", opts.out_path, "Output file (default stdout)");
    app.add_option("--format", opts.format, "Output format: csv | jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));

    auto* simulate = app.add_subcommand("simulate", "Run each configured policy on one job");
    auto* sweep = app.add_subcommand("sweep", "Sweep a parameter and average utilities");
    auto* select = app.add_subcommand("select", "Online policy selection over the pool");
    auto* adapt = app.add_subcommand("adapt", "Selection with phase-switched noise");
    auto* oracle = app.add_subcommand("oracle", "Exact offline optimum for one job");
    auto* synth = app.add_subcommand("synth-trace", "Emit the configured synthetic trace");

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return run_simulate(opts);
        if (sweep->parsed()) return run_sweep_cmd(opts);
        if (select->parsed()) return run_select_cmd(opts);
        if (adapt->parsed()) return run_adapt_cmd(opts);
        if (oracle->parsed()) return run_oracle(opts);
        if (synth->parsed()) return run_synth(opts);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const spotsched::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const spotsched::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
