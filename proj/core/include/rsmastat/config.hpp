#pragma once

// Experiment configuration: a sectioned key = value text file.
//
//   [experiment]           run-wide settings
//   [correlated-rayleigh]  scenario parameters (scenario = correlated-rayleigh)
//   [ula-phase]            scenario parameters (scenario = ula-phase)
//   [optimizer]            AO settings
//
// Units are part of the key name (`_db`, `_rad`). Angle values accept plain
// numbers and multiples of pi ("pi", "-pi/2", "2pi", "0.25*pi"). Unknown
// sections and keys are errors. docs/formats.md lists every key.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsmastat/channels.hpp"
#include "rsmastat/ratecore.hpp"

namespace rsmastat {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ScenarioKind { kCorrelatedRayleigh, kUlaPhase };

std::string to_string(ScenarioKind k);

struct OptimizerSettings {
    double tolerance = 1e-4;
    int max_iterations = 500;
    /// Extra randomly initialized starts per strategy, beyond the default start.
    int random_restarts = 0;
    double common_power_fraction = 0.5;
    /// Also start RSMA from the SDMA solution with part of its power moved to
    /// the common precoder; the better of the starts is reported.
    bool rsma_start_from_sdma = true;
    double sdma_start_common_fraction = 0.2;
};

struct ExperimentConfig {
    std::string name = "experiment";
    ScenarioKind scenario = ScenarioKind::kCorrelatedRayleigh;
    int n_tx = 4;
    int users = 3;
    std::vector<double> snr_db;
    int samples = 200;
    int draws = 20;
    std::vector<Strategy> strategies{Strategy::kRsma, Strategy::kSdma};
    std::uint64_t seed = 1;
    /// Out-of-sample evaluation set size; 0 means the optimization size.
    int eval_samples = 0;
    bool record_wall_time = true;
    std::string output;            // per-draw CSV (empty: stdout)
    std::string aggregate_output;  // aggregate CSV (empty: none)
    std::string starts_output;     // per-start CSV (empty: none)

    CorrelatedRayleighTemplate rayleigh;
    UlaPhaseTemplate ula;
    OptimizerSettings optimizer;

    StatsTemplate stats_template() const;
    int evaluation_sample_count() const { return eval_samples > 0 ? eval_samples : samples; }
    void validate() const;  // throws ConfigError
};

/// Parses "pi"-expressions and plain numbers. Throws ConfigError.
double parse_angle(const std::string& text);

/// `overrides` are "section.key=value" strings applied after the file.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>",
                              const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace rsmastat
