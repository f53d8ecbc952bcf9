#pragma once

// Log-barrier interior-point method for small dense convex QCQPs:
//
//   minimize    c^T x
//   subject to  f_i(x) = sum_b x_b^T Q_i x_b + a_i^T x + k_i <= 0
//
// where each Q_i is a symmetric PSD block applied to one or more equally
// sized sub-vectors x_b of x (this is how a Hermitian quadratic form shared by
// several precoders looks after real lifting). Linear constraints simply have
// no blocks.

#include <optional>
#include <string>
#include <vector>

#include "rsmastat/matcore.hpp"

namespace rsmastat {

struct QcqpConstraint {
    RMatrix block;             // d x d symmetric PSD, empty for linear constraints
    std::vector<int> offsets;  // start index of every sub-vector the block applies to
    RVector linear;            // length n
    double constant = 0.0;
    std::string label;

    double value(const RVector& x) const;
    /// value and gradient in one pass.
    double value_and_gradient(const RVector& x, RVector& gradient) const;
};

struct QcqpProblem {
    int dimension = 0;
    RVector objective;  // minimized
    std::vector<QcqpConstraint> constraints;

    /// max_i f_i(x).
    double max_violation(const RVector& x) const;
};

enum class SolverStatus { kOptimal, kTargetReached, kMaxIterations, kNumericalFailure };

std::string to_string(SolverStatus s);

struct KktResiduals {
    double primal = 0.0;  // max(0, max_i f_i)
    double dual = 0.0;    // ||c + sum_i lambda_i grad f_i||_inf
    double gap = 0.0;     // sum_i lambda_i (-f_i)
};

struct BarrierSettings {
    double gap_tolerance = 1e-8;       // absolute duality gap m / t
    double barrier_growth = 20.0;      // t <- growth * t
    double initial_barrier = 1.0;
    double newton_tolerance = 1e-10;   // lambda^2 / 2 at which centering stops
    int max_newton_iterations = 400;   // total over all centering steps
    /// Rounding can break Newton near the boundary once t is large. If that
    /// happens with m / t already below this, the current point is reported optimal.
    double stall_gap_tolerance = 1e-6;
    /// Stop as soon as the objective drops below this value (phase-one use).
    std::optional<double> stop_below;
};

struct QcqpResult {
    RVector x;
    RVector multipliers;
    SolverStatus status = SolverStatus::kNumericalFailure;
    double objective = 0.0;
    KktResiduals kkt;
    int newton_iterations = 0;
};

/// `start` must satisfy every constraint strictly; otherwise the result is
/// kNumericalFailure at `start`.
QcqpResult solve_qcqp(const QcqpProblem& problem, const RVector& start,
                      const BarrierSettings& settings = {});

}  // namespace rsmastat
