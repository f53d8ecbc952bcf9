#include "rsmastat/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "rsmastat/rng.hpp"

namespace rsmastat {

namespace {

constexpr std::uint64_t kStatisticsTag = 0x5354415453ULL;
constexpr std::uint64_t kOptimizationTag = 0x4F5054ULL;
constexpr std::uint64_t kEvaluationTag = 0x4556414CULL;
constexpr std::uint64_t kRestartTag = 0x52535452ULL;

struct StartOutcome {
    std::string label;
    std::optional<AoTrace> trace;
    std::string error;
    double wall_ms = 0.0;
};

bool contains(const std::vector<Strategy>& v, Strategy s) { return std::find(v.begin(), v.end(), s) != v.end(); }

StartOutcome run_start(const SampleSet& samples, double power, const AoConfig& ao, std::string label) {
    StartOutcome out;
    out.label = std::move(label);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        out.trace = ao_optimize(samples, power, ao);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::string status_of(const AoTrace& t) {
    return t.status == AoStatus::kSubproblemFailure ? "subproblem-failure" : "ok";
}

/// Index of the start with the largest in-sample objective; nullopt if every start threw.
std::optional<std::size_t> best_start(const std::vector<StartOutcome>& starts) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (!starts[i].trace) continue;
        if (!best || starts[i].trace->final_mmf.value > starts[*best].trace->final_mmf.value) best = i;
    }
    return best;
}

}  // namespace

std::uint64_t statistics_seed(std::uint64_t master) { return derive_seed(master, {kStatisticsTag}); }
std::uint64_t optimization_seed(std::uint64_t master, int draw) {
    return derive_seed(master, {kOptimizationTag, static_cast<std::uint64_t>(draw)});
}
std::uint64_t evaluation_seed(std::uint64_t master, int draw) {
    return derive_seed(master, {kEvaluationTag, static_cast<std::uint64_t>(draw)});
}
std::uint64_t restart_seed(std::uint64_t master, int draw, int snr_index, int restart) {
    return derive_seed(master, {kRestartTag, static_cast<std::uint64_t>(draw), static_cast<std::uint64_t>(snr_index),
                                static_cast<std::uint64_t>(restart)});
}

double snr_db_to_power(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

int resolve_worker_count(const RunOptions& options) {
    if (options.single_threaded) return 1;
    if (options.workers > 0) return options.workers;
    if (const char* env = std::getenv("RSMA_WORKERS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 4096)
            throw ConfigError(std::string("RSMA_WORKERS must be a positive integer, got '") + env + "'");
        return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void run_cell(const CellInputs& in, std::vector<ResultRow>& rows, std::vector<StartRecord>& starts) {
    const ExperimentConfig& cfg = *in.config;
    const double snr_db = cfg.snr_db[static_cast<std::size_t>(in.snr_index)];
    const double power = snr_db_to_power(snr_db);

    AoConfig base;
    base.tolerance = cfg.optimizer.tolerance;
    base.max_iterations = cfg.optimizer.max_iterations;
    base.common_power_fraction = cfg.optimizer.common_power_fraction;
    base.noma_order = order_by_strength(*in.stats);

    auto strategy_starts = [&](Strategy s, const std::optional<PrecoderSet>& from_sdma) {
        std::vector<StartOutcome> out;
        AoConfig c = base;
        c.strategy = s;
        out.push_back(run_start(*in.samples, power, c, "default"));
        if (from_sdma) {
            AoConfig w = c;
            w.init = InitPolicy::kGiven;
            w.initial = rsma_start_from_sdma(*in.samples, *from_sdma, cfg.optimizer.sdma_start_common_fraction);
            out.push_back(run_start(*in.samples, power, w, "from-sdma"));
        }
        for (int r = 0; r < cfg.optimizer.random_restarts; ++r) {
            AoConfig rc = c;
            rc.init = InitPolicy::kRandom;
            rc.init_seed = restart_seed(cfg.seed, in.draw, in.snr_index, r);
            out.push_back(run_start(*in.samples, power, rc, "random-" + std::to_string(r + 1)));
        }
        return out;
    };

    auto record = [&](Strategy s, const std::vector<StartOutcome>& outcomes) {
        for (const StartOutcome& o : outcomes) {
            StartRecord rec;
            rec.scenario = cfg.name;
            rec.strategy = s;
            rec.snr_db = snr_db;
            rec.draw = in.draw;
            rec.start = o.label;
            if (o.trace) {
                rec.mmf_rate = o.trace->final_mmf.value;
                rec.iterations = o.trace->iteration_count();
                rec.converged = o.trace->converged;
                rec.monotonicity_warning = o.trace->monotonicity_warning;
                rec.status = status_of(*o.trace);
            } else {
                rec.mmf_rate = std::numeric_limits<double>::quiet_NaN();
                rec.status = "error";
            }
            starts.push_back(std::move(rec));
        }

        ResultRow row;
        row.scenario = cfg.name;
        row.strategy = s;
        row.snr_db = snr_db;
        row.draw = in.draw;
        if (cfg.record_wall_time)
            for (const StartOutcome& o : outcomes) row.wall_ms += o.wall_ms;
        const auto best = best_start(outcomes);
        if (!best) {
            row.mmf_rate = row.mmf_rate_eval = std::numeric_limits<double>::quiet_NaN();
            row.status = "error";
        } else {
            const AoTrace& t = *outcomes[*best].trace;
            row.mmf_rate = t.final_mmf.value;
            row.iterations = t.iteration_count();
            row.converged = t.converged;
            row.status = status_of(t);
            try {
                row.mmf_rate_eval = mmf_with_optimal_split(*in.evaluation, t.plan, t.final_precoders);
            } catch (const std::exception&) {
                row.mmf_rate_eval = std::numeric_limits<double>::quiet_NaN();
                row.status = "error";
            }
        }
        rows.push_back(std::move(row));
    };

    const bool want_rsma = contains(cfg.strategies, Strategy::kRsma);
    const bool want_sdma = contains(cfg.strategies, Strategy::kSdma);
    std::optional<PrecoderSet> sdma_solution;
    if (want_sdma || (want_rsma && cfg.optimizer.rsma_start_from_sdma)) {
        const std::vector<StartOutcome> sdma = strategy_starts(Strategy::kSdma, std::nullopt);
        if (const auto best = best_start(sdma)) sdma_solution = sdma[*best].trace->final_precoders;
        if (want_sdma) record(Strategy::kSdma, sdma);
    }
    if (want_rsma) {
        const std::optional<PrecoderSet> seed =
            cfg.optimizer.rsma_start_from_sdma ? sdma_solution : std::optional<PrecoderSet>{};
        record(Strategy::kRsma, strategy_starts(Strategy::kRsma, seed));
    }
    if (contains(cfg.strategies, Strategy::kNoma)) record(Strategy::kNoma, strategy_starts(Strategy::kNoma, std::nullopt));
}

ResultTable run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    const int workers = resolve_worker_count(options);

    const std::vector<ChannelStats> ensemble =
        draw_statistics_ensemble(config.stats_template(), config.draws, statistics_seed(config.seed));
    std::vector<SampleSet> optimization;
    std::vector<SampleSet> evaluation;
    optimization.reserve(ensemble.size());
    evaluation.reserve(ensemble.size());
    for (int d = 0; d < config.draws; ++d) {
        const ChannelStats& stats = ensemble[static_cast<std::size_t>(d)];
        optimization.push_back(sample_channels(stats, config.samples, optimization_seed(config.seed, d)));
        evaluation.push_back(sample_channels(true_statistics(stats), config.evaluation_sample_count(),
                                             evaluation_seed(config.seed, d)));
    }

    const int n_snr = static_cast<int>(config.snr_db.size());
    const int total = config.draws * n_snr;
    std::vector<std::vector<ResultRow>> cell_rows(static_cast<std::size_t>(total));
    std::vector<std::vector<StartRecord>> cell_starts(static_cast<std::size_t>(total));
    std::atomic<int> next{0};
    std::mutex progress_mutex;
    int done = 0;

    auto worker = [&] {
        for (int cell = next.fetch_add(1); cell < total; cell = next.fetch_add(1)) {
            const int d = cell / n_snr;
            CellInputs in;
            in.config = &config;
            in.stats = &ensemble[static_cast<std::size_t>(d)];
            in.samples = &optimization[static_cast<std::size_t>(d)];
            in.evaluation = &evaluation[static_cast<std::size_t>(d)];
            in.draw = d;
            in.snr_index = cell % n_snr;
            run_cell(in, cell_rows[static_cast<std::size_t>(cell)], cell_starts[static_cast<std::size_t>(cell)]);
            if (options.progress) {
                std::lock_guard lock(progress_mutex);
                options.progress(++done, total);
            }
        }
    };

    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < std::min(workers, total); ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    ResultTable table;
    for (int c = 0; c < total; ++c) {
        auto& r = cell_rows[static_cast<std::size_t>(c)];
        auto& s = cell_starts[static_cast<std::size_t>(c)];
        table.rows.insert(table.rows.end(), r.begin(), r.end());
        table.starts.insert(table.starts.end(), s.begin(), s.end());
    }
    table.sort();
    return table;
}

}  // namespace rsmastat
