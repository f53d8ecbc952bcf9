// rsmastat: command-line front end (run, sample, slope, solve).

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rsmastat/config.hpp"
#include "rsmastat/harness.hpp"
#include "rsmastat/optimizer.hpp"
#include "rsmastat/result_table.hpp"
#include "rsmastat/subproblem.hpp"

namespace {

using namespace rsmastat;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct RunArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string output;
    std::string aggregate;
    std::string starts;
    std::optional<std::uint64_t> seed;
    int workers = 0;
    bool single_threaded = false;
    bool quiet = false;
};

int cmd_run(const RunArgs& a) {
    std::vector<std::string> overrides = a.overrides;
    if (a.seed) overrides.push_back("experiment.seed=" + std::to_string(*a.seed));
    if (!a.output.empty()) overrides.push_back("experiment.output=" + a.output);
    if (!a.aggregate.empty()) overrides.push_back("experiment.aggregate_output=" + a.aggregate);
    if (!a.starts.empty()) overrides.push_back("experiment.starts_output=" + a.starts);
    const ExperimentConfig cfg = load_config(a.config, overrides);

    RunOptions opts;
    opts.workers = a.workers;
    opts.single_threaded = a.single_threaded;
    if (!a.quiet)
        opts.progress = [](int done, int total) { std::fprintf(stderr, "\r[%d/%d] cells", done, total); };
    const ResultTable table = run_experiment(cfg, opts);
    if (!a.quiet) std::fputc('\n', stderr);

    if (cfg.output.empty()) emit_csv(std::cout, table);
    else emit_csv(cfg.output, table);
    if (!cfg.aggregate_output.empty()) emit_aggregate_csv(cfg.aggregate_output, table.aggregate());
    if (!cfg.starts_output.empty()) emit_starts_csv(cfg.starts_output, table);

    if (table.has_failures()) {
        std::cerr << "rsmastat: some cells failed; see the status column\n";
        return kExitPartial;
    }
    return kExitOk;
}

struct SampleArgs {
    std::string config;
    std::vector<std::string> overrides;
    int draw = 0;
    bool evaluation = false;
    std::string output;
};

int cmd_sample(const SampleArgs& a) {
    const ExperimentConfig cfg = load_config(a.config, a.overrides);
    if (a.draw < 0 || a.draw >= cfg.draws)
        throw ConfigError("--draw must lie in [0, " + std::to_string(cfg.draws) + ")");
    const auto ensemble = draw_statistics_ensemble(cfg.stats_template(), cfg.draws, statistics_seed(cfg.seed));
    const ChannelStats& stats = ensemble[static_cast<std::size_t>(a.draw)];
    const SampleSet set = a.evaluation
                              ? sample_channels(true_statistics(stats), cfg.evaluation_sample_count(),
                                                evaluation_seed(cfg.seed, a.draw))
                              : sample_channels(stats, cfg.samples, optimization_seed(cfg.seed, a.draw));
    if (a.output.empty() || a.output == "-") {
        write_sample_set(std::cout, set);
    } else {
        std::ofstream out(a.output);
        if (!out) throw std::runtime_error(a.output + ": cannot open for writing");
        write_sample_set(out, set);
    }
    return kExitOk;
}

struct SlopeArgs {
    std::string csv;
    std::string strategy = "rsma";
    double from = 0.0;
    double to = 0.0;
    std::string column = "eval";
    std::string scenario;
};

int cmd_slope(const SlopeArgs& a) {
    const ResultTable table = parse_csv_file(a.csv);
    if (a.column != "eval" && a.column != "in-sample") throw ConfigError("--column must be eval or in-sample");
    const RateColumn col = a.column == "eval" ? RateColumn::kOutOfSample : RateColumn::kInSample;
    const double slope = estimate_slope(table, parse_strategy(a.strategy), a.from, a.to, col, a.scenario);
    std::cout << format_number(slope) << '\n';
    return kExitOk;
}

struct SolveArgs {
    std::string scenario = "correlated-rayleigh";
    int n_tx = 4;
    int users = 3;
    int samples = 200;
    std::uint64_t seed = 1;
    double snr_db = 20.0;
    std::string strategy = "rsma";
    double magnitude = 0.0;
    std::vector<std::string> t_phases;
    std::string inaccuracy = "0";
    std::vector<double> amplitudes;
    std::vector<std::string> mean_phases;
    std::string phase_range = "0";
    std::string samples_file;
    double tolerance = 1e-4;
    int max_iterations = 500;
    std::string init = "eigen";
    std::string trace;
    std::string dump_subproblem;
};

ChannelStats solve_stats(const SolveArgs& a) {
    auto phases = [&](const std::vector<std::string>& text) {
        std::vector<double> out;
        for (const std::string& s : text) out.push_back(parse_angle(s));
        if (out.empty()) out.assign(static_cast<std::size_t>(a.users), 0.0);
        if (static_cast<int>(out.size()) != a.users) throw ConfigError("need one phase per user");
        return out;
    };
    if (a.scenario == "correlated-rayleigh") {
        CorrelatedRayleighStats s;
        s.n_tx = a.n_tx;
        for (double ph : phases(a.t_phases)) s.coefficients.push_back(std::polar(a.magnitude, ph));
        s.phase_inaccuracy_half_width = parse_angle(a.inaccuracy);
        s.validate();
        return s;
    }
    if (a.scenario == "ula-phase") {
        UlaPhaseStats s;
        s.n_tx = a.n_tx;
        s.amplitudes = a.amplitudes.empty() ? std::vector<double>(static_cast<std::size_t>(a.users), 1.0) : a.amplitudes;
        if (static_cast<int>(s.amplitudes.size()) != a.users) throw ConfigError("need one amplitude per user");
        s.mean_phases = phases(a.mean_phases);
        s.phase_range = parse_angle(a.phase_range);
        s.validate();
        return s;
    }
    throw ConfigError("--scenario must be correlated-rayleigh or ula-phase");
}

int cmd_solve(const SolveArgs& a) {
    SampleSet samples;
    std::optional<ChannelStats> stats;
    if (!a.samples_file.empty()) {
        std::ifstream in(a.samples_file);
        if (!in) throw ConfigError(a.samples_file + ": cannot open sample set");
        samples = read_sample_set(in);
    } else {
        stats = solve_stats(a);
        samples = sample_channels(*stats, a.samples, a.seed);
    }
    AoConfig ao;
    ao.strategy = parse_strategy(a.strategy);
    ao.tolerance = a.tolerance;
    ao.max_iterations = a.max_iterations;
    ao.init = parse_init_policy(a.init);
    ao.init_seed = a.seed;
    if (stats) ao.noma_order = order_by_strength(*stats);
    const double power = snr_db_to_power(a.snr_db);
    const AoTrace trace = ao_optimize(samples, power, ao);

    std::printf("strategy %s\nstatus %s\niterations %d\nconverged %d\nmmf_rate %.12g\n",
                to_string(trace.plan.strategy).c_str(), to_string(trace.status).c_str(), trace.iteration_count(),
                trace.converged ? 1 : 0, trace.final_mmf.value);
    const PrecoderSet& p = trace.final_precoders;
    std::printf("power %.12g\n", p.total_power());
    for (int k = 0; k < p.users(); ++k) std::printf("common_share %d %.12g\n", k, p.common_rates()(k));

    if (!a.trace.empty()) {
        std::ofstream out(a.trace);
        if (!out) throw std::runtime_error(a.trace + ": cannot open for writing");
        write_trace(out, trace);
    }
    if (!a.dump_subproblem.empty()) {
        const EqualizerWeightState state = mmse_update(samples, trace.plan, p);
        std::ofstream out(a.dump_subproblem);
        if (!out) throw std::runtime_error(a.dump_subproblem + ": cannot open for writing");
        write_subproblem(out, assemble_coefficients(samples, trace.plan, state), power);
    }
    return trace.status == AoStatus::kSubproblemFailure ? kExitPartial : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Max-min fair statistical beamforming for RSMA, SDMA and NOMA"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a Monte Carlo experiment from a config file");
    run_cmd->add_option("config", run.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--set", run.overrides, "Override a config key: section.key=value");
    run_cmd->add_option("-o,--output", run.output, "Per-draw CSV path");
    run_cmd->add_option("--aggregate", run.aggregate, "Aggregate CSV path");
    run_cmd->add_option("--starts", run.starts, "Per-start CSV path");
    run_cmd->add_option("--seed", run.seed, "Master seed");
    run_cmd->add_option("-j,--workers", run.workers, "Worker threads (default: RSMA_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    run_cmd->add_flag("--single-threaded", run.single_threaded, "Run every cell on the calling thread");
    run_cmd->add_flag("-q,--quiet", run.quiet, "No progress output");

    SampleArgs sample;
    auto* sample_cmd = app.add_subcommand("sample", "Write one draw's sample set as text");
    sample_cmd->add_option("config", sample.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    sample_cmd->add_option("--set", sample.overrides, "Override a config key: section.key=value");
    sample_cmd->add_option("--draw", sample.draw, "Statistics draw index");
    sample_cmd->add_flag("--evaluation", sample.evaluation, "Evaluation set (true statistics) instead");
    sample_cmd->add_option("-o,--output", sample.output, "Output path ('-' or empty: stdout)");

    SlopeArgs slope;
    auto* slope_cmd = app.add_subcommand("slope", "Empirical DoF from a per-draw CSV");
    slope_cmd->add_option("csv", slope.csv, "Per-draw CSV")->required()->check(CLI::ExistingFile);
    slope_cmd->add_option("--strategy", slope.strategy, "rsma, sdma or noma");
    slope_cmd->add_option("--from", slope.from, "Window start, dB")->required();
    slope_cmd->add_option("--to", slope.to, "Window end, dB")->required();
    slope_cmd->add_option("--column", slope.column, "eval (default) or in-sample");
    slope_cmd->add_option("--scenario", slope.scenario, "Scenario name filter");

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "Single optimization run");
    solve_cmd->add_option("--scenario", solve.scenario, "correlated-rayleigh or ula-phase");
    solve_cmd->add_option("--n-tx", solve.n_tx, "Transmit antennas")->check(CLI::PositiveNumber);
    solve_cmd->add_option("--users", solve.users, "Users")->check(CLI::PositiveNumber);
    solve_cmd->add_option("--samples", solve.samples, "Sample count")->check(CLI::PositiveNumber);
    solve_cmd->add_option("--seed", solve.seed, "Sampling seed");
    solve_cmd->add_option("--snr-db", solve.snr_db, "Transmit SNR in dB");
    solve_cmd->add_option("--strategy", solve.strategy, "rsma, sdma or noma");
    solve_cmd->add_option("--magnitude", solve.magnitude, "|t| (correlated-rayleigh)");
    solve_cmd->add_option("--t-phases-rad", solve.t_phases, "Per-user arg(t_k)");
    solve_cmd->add_option("--inaccuracy-half-width-rad", solve.inaccuracy, "Phase inaccuracy half-width");
    solve_cmd->add_option("--amplitudes", solve.amplitudes, "Per-user beta_k (ula-phase)");
    solve_cmd->add_option("--mean-phases-rad", solve.mean_phases, "Per-user mean phase (ula-phase)");
    solve_cmd->add_option("--phase-range-rad", solve.phase_range, "Phase range r (ula-phase)");
    solve_cmd->add_option("--samples-file", solve.samples_file, "Use a sample set written by 'sample'");
    solve_cmd->add_option("--tolerance", solve.tolerance, "Convergence tolerance");
    solve_cmd->add_option("--max-iterations", solve.max_iterations, "Iteration cap");
    solve_cmd->add_option("--init", solve.init, "eigen or random");
    solve_cmd->add_option("--trace", solve.trace, "Write the iteration log here");
    solve_cmd->add_option("--dump-subproblem", solve.dump_subproblem,
                          "Write the convex subproblem at the final point here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*sample_cmd) return cmd_sample(sample);
        if (*slope_cmd) return cmd_slope(slope);
        if (*solve_cmd) return cmd_solve(solve);
    } catch (const ConfigError& e) {
        std::cerr << "rsmastat: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const PreconditionError& e) {
        std::cerr << "rsmastat: invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "rsmastat: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
