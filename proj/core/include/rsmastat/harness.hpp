#pragma once

// Monte Carlo experiment driver: statistics draws x SNR grid x strategies.
//
// Seeds derive from the master seed only, so every strategy in a draw sees
// the same optimization and evaluation samples (common random numbers), and
// the output does not depend on the worker count.

#include <cstdint>
#include <functional>
#include <string>

#include "rsmastat/config.hpp"
#include "rsmastat/optimizer.hpp"
#include "rsmastat/result_table.hpp"

namespace rsmastat {

struct RunOptions {
    /// 0: take RSMA_WORKERS from the environment, else the hardware concurrency.
    int workers = 0;
    bool single_threaded = false;
    /// Called after each finished (draw, SNR) cell, from the worker thread, serialized.
    std::function<void(int done, int total)> progress;
};

/// Worker count after applying the environment override and single-threaded flag.
/// A malformed RSMA_WORKERS value throws ConfigError.
int resolve_worker_count(const RunOptions& options);

std::uint64_t statistics_seed(std::uint64_t master);
std::uint64_t optimization_seed(std::uint64_t master, int draw);
std::uint64_t evaluation_seed(std::uint64_t master, int draw);
std::uint64_t restart_seed(std::uint64_t master, int draw, int snr_index, int restart);

double snr_db_to_power(double snr_db);

struct CellInputs {
    const ExperimentConfig* config = nullptr;
    const ChannelStats* stats = nullptr;
    const SampleSet* samples = nullptr;
    const SampleSet* evaluation = nullptr;
    int draw = 0;
    int snr_index = 0;
};

/// Runs every configured strategy for one (draw, SNR) cell: one row per
/// strategy (its best start, evaluated out of sample) and one record per start.
void run_cell(const CellInputs& in, std::vector<ResultRow>& rows, std::vector<StartRecord>& starts);

ResultTable run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace rsmastat
