#pragma once

// Alternating optimization over (equalizers, weights) and (precoders,
// common-rate shares): closed-form MMSE block, then the convex QCQP block,
// repeated until the auxiliary max-min rate moves by less than the tolerance.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rsmastat/channels.hpp"
#include "rsmastat/ratecore.hpp"
#include "rsmastat/subproblem.hpp"

namespace rsmastat {

enum class InitPolicy {
    kDominantEigenvector,  // eigenvectors of the sample covariances
    kRandom,               // i.i.d. complex Gaussian directions (restarts)
    kGiven,                // AoConfig::initial
};

std::string to_string(InitPolicy p);
InitPolicy parse_init_policy(const std::string& name);

struct AoConfig {
    Strategy strategy = Strategy::kRsma;
    double tolerance = 1e-4;
    int max_iterations = 500;
    InitPolicy init = InitPolicy::kDominantEigenvector;
    /// Fraction of the budget given to the common precoder at start (RSMA).
    double common_power_fraction = 0.5;
    std::uint64_t init_seed = 0;
    std::optional<PrecoderSet> initial;
    /// SC-SIC decoding order, strongest first. Empty: order by mean channel energy.
    std::vector<int> noma_order;
    /// Decrease of the objective beyond this counts as a non-monotone step.
    double monotonic_slack = 1e-6;
    BarrierSettings barrier;

    void validate() const;
};

enum class AoStatus { kConverged, kMaxIterations, kSubproblemFailure };

std::string to_string(AoStatus s);

struct AoIterate {
    int iteration = 0;
    double objective = 0.0;       // auxiliary rate from the convex block
    double mmf = 0.0;             // max-min rate of the new precoders
    double max_constraint = 0.0;  // largest QCQP constraint value (<= 0 feasible)
    double power = 0.0;
    SolverStatus solver = SolverStatus::kOptimal;
    bool common_stream_disabled = false;
};

struct AoTrace {
    LinkPlan plan;
    std::vector<AoIterate> iterations;
    AoStatus status = AoStatus::kMaxIterations;
    bool converged = false;
    bool monotonicity_warning = false;
    double initial_mmf = 0.0;
    PrecoderSet final_precoders;  // best iterate by max-min rate (initial point included)
    MmfEvaluation final_mmf;

    int iteration_count() const { return static_cast<int>(iterations.size()); }
    std::vector<double> objectives() const;
};

/// Dominant-eigenvector (or random) starting point with total power exactly
/// `power_budget`: a fraction alpha to the common precoder and (1-alpha)/K to
/// each private precoder; shares start at zero.
PrecoderSet initialize_precoders(const SampleSet& samples, double power_budget, InitPolicy policy,
                                 double common_fraction, std::uint64_t seed = 0);

/// Users by decreasing mean channel energy over the samples; ties keep index order.
std::vector<int> order_by_channel_energy(const SampleSet& samples);
/// Users by decreasing statistical strength (beta_k for ULA, tr(R_k) for
/// correlated Rayleigh); ties keep index order.
std::vector<int> order_by_strength(const ChannelStats& stats);

LinkPlan make_plan(Strategy strategy, const SampleSet& samples, const std::vector<int>& noma_order = {});

/// Embeds an SDMA solution as an RSMA starting point: the private precoders
/// keep a (1 - fraction) share of their power and the common precoder gets the
/// rest along the dominant eigenvector of the summed sample covariance.
PrecoderSet rsma_start_from_sdma(const SampleSet& samples, const PrecoderSet& sdma, double fraction);

AoTrace ao_optimize(const SampleSet& samples, double power_budget, const AoConfig& config);

/// ao_optimize with the SC-SIC NOMA plan.
AoTrace noma_optimize(const SampleSet& samples, double power_budget, const AoConfig& config);

/// Line-oriented log: one "iter objective mmf max_constraint power solver" line per iteration.
void write_trace(std::ostream& os, const AoTrace& trace);

}  // namespace rsmastat
