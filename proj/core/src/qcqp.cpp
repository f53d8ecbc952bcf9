#include "rsmastat/qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsmastat {

double QcqpConstraint::value(const RVector& x) const {
    double v = linear.dot(x) + constant;
    const Eigen::Index d = block.rows();
    for (int off : offsets) {
        const auto xb = x.segment(off, d);
        v += xb.dot(block * xb);
    }
    return v;
}

double QcqpConstraint::value_and_gradient(const RVector& x, RVector& gradient) const {
    gradient = linear;
    double v = linear.dot(x) + constant;
    const Eigen::Index d = block.rows();
    for (int off : offsets) {
        const auto xb = x.segment(off, d);
        const RVector qx = block * xb;
        v += xb.dot(qx);
        gradient.segment(off, d) += 2.0 * qx;
    }
    return v;
}

double QcqpProblem::max_violation(const RVector& x) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const QcqpConstraint& c : constraints) worst = std::max(worst, c.value(x));
    return worst;
}

std::string to_string(SolverStatus s) {
    switch (s) {
        case SolverStatus::kOptimal: return "optimal";
        case SolverStatus::kTargetReached: return "target-reached";
        case SolverStatus::kMaxIterations: return "max-iterations";
        case SolverStatus::kNumericalFailure: return "numerical-failure";
    }
    return "?";
}

namespace {

struct BarrierState {
    RVector values;                  // f_i(x)
    std::vector<RVector> gradients;  // grad f_i(x)
};

bool evaluate(const QcqpProblem& p, const RVector& x, BarrierState& st) {
    const std::size_t m = p.constraints.size();
    st.values.resize(static_cast<Eigen::Index>(m));
    st.gradients.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double v = p.constraints[i].value_and_gradient(x, st.gradients[i]);
        if (!(v < 0.0)) return false;
        st.values(static_cast<Eigen::Index>(i)) = v;
    }
    return true;
}

double barrier_value(const QcqpProblem& p, const RVector& x, double t, bool& inside) {
    double v = t * p.objective.dot(x);
    inside = true;
    for (const QcqpConstraint& c : p.constraints) {
        const double f = c.value(x);
        if (!(f < 0.0)) {
            inside = false;
            return std::numeric_limits<double>::infinity();
        }
        v -= std::log(-f);
    }
    return v;
}

KktResiduals residuals(const QcqpProblem& p, const BarrierState& st, double t, RVector& lambda) {
    const Eigen::Index m = st.values.size();
    lambda.resize(m);
    RVector stationarity = p.objective;
    KktResiduals r;
    r.primal = std::max(0.0, st.values.size() ? st.values.maxCoeff() : 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        lambda(i) = 1.0 / (t * (-st.values(i)));
        stationarity += lambda(i) * st.gradients[static_cast<std::size_t>(i)];
        r.gap += lambda(i) * (-st.values(i));
    }
    r.dual = stationarity.size() ? stationarity.cwiseAbs().maxCoeff() : 0.0;
    return r;
}

}  // namespace

QcqpResult solve_qcqp(const QcqpProblem& problem, const RVector& start, const BarrierSettings& settings) {
    const int n = problem.dimension;
    const double m = static_cast<double>(problem.constraints.size());
    QcqpResult out;
    out.x = start;
    out.objective = problem.objective.dot(start);

    BarrierState st;
    if (start.size() != n || !evaluate(problem, start, st)) return out;

    RVector x = start;
    double t = settings.initial_barrier;
    int newton = 0;
    auto finish = [&](SolverStatus status) {
        out.x = x;
        out.objective = problem.objective.dot(x);
        out.status = status;
        out.newton_iterations = newton;
        if (evaluate(problem, x, st)) out.kkt = residuals(problem, st, t, out.multipliers);
        return out;
    };

    if (m == 0) return finish(SolverStatus::kNumericalFailure);
    auto stalled = [&]() {
        return finish(m / t <= settings.stall_gap_tolerance ? SolverStatus::kOptimal : SolverStatus::kNumericalFailure);
    };

    RMatrix hessian(n, n);
    RVector gradient(n);
    while (true) {
        // Centering: Newton's method on t c^T x - sum log(-f_i(x)).
        while (true) {
            if (settings.stop_below && problem.objective.dot(x) < *settings.stop_below)
                return finish(SolverStatus::kTargetReached);
            if (newton >= settings.max_newton_iterations) return finish(SolverStatus::kMaxIterations);
            if (!evaluate(problem, x, st)) return finish(SolverStatus::kNumericalFailure);

            gradient = t * problem.objective;
            hessian.setZero();
            for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
                const QcqpConstraint& c = problem.constraints[i];
                const double inv = 1.0 / (-st.values(static_cast<Eigen::Index>(i)));
                const RVector& g = st.gradients[i];
                gradient += inv * g;
                hessian.selfadjointView<Eigen::Lower>().rankUpdate(g, inv * inv);
                const Eigen::Index d = c.block.rows();
                for (int off : c.offsets) hessian.block(off, off, d, d) += (2.0 * inv) * c.block;
            }
            hessian.triangularView<Eigen::StrictlyUpper>() = hessian.transpose();

            // Escalate a diagonal shift until the step is a descent direction.
            Eigen::LDLT<RMatrix> ldlt(hessian);
            RVector step = ldlt.solve(-gradient);
            double decrement2 = -gradient.dot(step);
            const double scale = std::max(1.0, hessian.diagonal().cwiseAbs().maxCoeff());
            for (double reg = 1e-12; ldlt.info() != Eigen::Success || !step.allFinite() || decrement2 < 0.0; reg *= 100.0) {
                if (reg > 1e-4) return stalled();
                hessian.diagonal().array() += reg * scale;
                ldlt.compute(hessian);
                step = ldlt.solve(-gradient);
                decrement2 = -gradient.dot(step);
            }
            ++newton;
            if (decrement2 / 2.0 <= settings.newton_tolerance) break;

            bool inside = false;
            const double f0 = barrier_value(problem, x, t, inside);
            double alpha = 1.0;
            RVector trial = x + alpha * step;
            double f1 = barrier_value(problem, trial, t, inside);
            while (!inside || f1 > f0 - 0.25 * alpha * decrement2 + 1e-13 * std::abs(f0)) {
                alpha *= 0.5;
                if (alpha < 1e-16) break;
                trial = x + alpha * step;
                f1 = barrier_value(problem, trial, t, inside);
            }
            if (alpha < 1e-16) break;  // no further progress at this t
            x = trial;
        }

        if (m / t <= settings.gap_tolerance) return finish(SolverStatus::kOptimal);
        t *= settings.barrier_growth;
    }
}

}  // namespace rsmastat
