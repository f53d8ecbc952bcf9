#pragma once

// The convex block of the WMMSE alternating optimization: with equalizers and
// weights fixed, every sample-average weighted MSE is a convex quadratic in
// the precoders,
//
//   xi(P) = sum_{i in S} p_i^H Psi p_i + t - 2 Re{f^H p_d} + u - v,
//
// (S = decoded stream d plus its interferers), and the max-min rate problem
// becomes a QCQP in the precoders, common-rate shares and the auxiliary rate.

#include <iosfwd>
#include <optional>
#include <vector>

#include "rsmastat/channels.hpp"
#include "rsmastat/qcqp.hpp"
#include "rsmastat/ratecore.hpp"

namespace rsmastat {

/// Sample-average coefficients of one decoding link.
struct LinkCoefficients {
    HermitianMatrix psi;  // mean of u |g|^2 h h^H
    CVector f;            // mean of u conj(g) h
    double t = 0.0;       // mean of u |g|^2 (noise term)
    double u = 0.0;       // mean of u
    double v = 0.0;       // mean of log2 u
};

struct SubproblemCoefficients {
    LinkPlan plan;
    int n_tx = 0;
    std::vector<LinkCoefficients> links;  // parallel to plan.links

    /// Sample-average weighted MSE of link `l` at `precoders`.
    double link_wmse(int l, const PrecoderSet& precoders) const;
};

SubproblemCoefficients assemble_coefficients(const SampleSet& samples, const LinkPlan& plan,
                                             const EqualizerWeightState& state);

struct SubproblemOptions {
    BarrierSettings barrier;
    /// Previous iterate; used to build the strictly feasible starting point.
    std::optional<PrecoderSet> warm_start;
};

struct SubproblemSolution {
    PrecoderSet precoders;
    double objective = 0.0;  // the auxiliary max-min rate r_g
    SolverStatus status = SolverStatus::kNumericalFailure;
    KktResiduals kkt;
    int newton_iterations = 0;
    /// The common-stream constraints had no strict interior (some user's
    /// common link cannot carry positive rate), so the common stream and
    /// shares were fixed to zero for this solve.
    bool common_stream_disabled = false;
    /// Largest constraint value at the returned point (<= 0 when feasible).
    double max_constraint = 0.0;
};

SubproblemSolution solve_convex_subproblem(const SubproblemCoefficients& coeffs, double power_budget,
                                           const SubproblemOptions& options = {});

/// Self-describing text dump, see docs/formats.md.
void write_subproblem(std::ostream& os, const SubproblemCoefficients& coeffs, double power_budget);
SubproblemCoefficients read_subproblem(std::istream& is, double* power_budget = nullptr);

}  // namespace rsmastat
