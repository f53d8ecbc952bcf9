#include "rsmastat/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rsmastat {

double SubproblemCoefficients::link_wmse(int l, const PrecoderSet& precoders) const {
    const DecodingLink& link = plan.links[static_cast<std::size_t>(l)];
    const LinkCoefficients& c = links[static_cast<std::size_t>(l)];
    const CMatrix& p = precoders.streams();
    const CMatrix& psi = c.psi.matrix();
    double quad = (p.col(link.stream).adjoint() * psi * p.col(link.stream))(0, 0).real();
    for (int i : link.interferers) quad += (p.col(i).adjoint() * psi * p.col(i))(0, 0).real();
    return quad + c.t - 2.0 * c.f.dot(p.col(link.stream)).real() + c.u - c.v;
}

SubproblemCoefficients assemble_coefficients(const SampleSet& samples, const LinkPlan& plan,
                                             const EqualizerWeightState& state) {
    const int n_links = static_cast<int>(plan.links.size());
    if (state.samples() != samples.size() || state.links() != n_links)
        throw PreconditionError("assemble_coefficients: equalizer/weight state does not match samples and plan");
    if (plan.users != samples.users())
        throw PreconditionError("assemble_coefficients: plan user count does not match samples");

    const int n = samples.n_tx();
    const double inv_s = 1.0 / static_cast<double>(samples.size());
    SubproblemCoefficients out;
    out.plan = plan;
    out.n_tx = n;
    out.links.reserve(static_cast<std::size_t>(n_links));
    for (int l = 0; l < n_links; ++l) {
        const int user = plan.links[static_cast<std::size_t>(l)].user;
        CMatrix psi = CMatrix::Zero(n, n);
        CVector f = CVector::Zero(n);
        double t = 0.0, u = 0.0, v = 0.0;
        for (int s = 0; s < samples.size(); ++s) {
            const auto h = samples[s].col(user);
            const cdouble g = state.equalizer(s, l);
            const double w = state.weight(s, l);
            const double wg2 = w * std::norm(g);
            psi.noalias() += wg2 * (h * h.adjoint());
            f += (w * std::conj(g)) * h;
            t += wg2;
            u += w;
            v += std::log2(w);
        }
        out.links.push_back({HermitianMatrix(psi * inv_s), f * inv_s, t * inv_s, u * inv_s, v * inv_s});
    }
    return out;
}

namespace {

struct Layout {
    int n_tx = 0;
    std::vector<int> streams;
    std::vector<int> stream_offset;  // indexed by stream, -1 when inactive
    int share_offset = -1;           // first common-rate share, -1 when absent
    int users = 0;
    int rate_index = 0;
    int dimension = 0;
};

Layout make_layout(const SubproblemCoefficients& coeffs, bool with_common) {
    Layout lay;
    lay.n_tx = coeffs.n_tx;
    lay.users = coeffs.plan.users;
    lay.stream_offset.assign(static_cast<std::size_t>(lay.users + 1), -1);
    int off = 0;
    for (int s : coeffs.plan.active_streams()) {
        if (s == 0 && !with_common) continue;
        lay.streams.push_back(s);
        lay.stream_offset[static_cast<std::size_t>(s)] = off;
        off += 2 * lay.n_tx;
    }
    if (with_common) {
        lay.share_offset = off;
        off += lay.users;
    }
    lay.rate_index = off;
    lay.dimension = off + 1;
    return lay;
}

RMatrix lift(const CMatrix& psi) {
    const Eigen::Index n = psi.rows();
    RMatrix out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = psi.real();
    out.topRightCorner(n, n) = -psi.imag();
    out.bottomLeftCorner(n, n) = psi.imag();
    out.bottomRightCorner(n, n) = psi.real();
    return 0.5 * (out + out.transpose());
}

// Quadratic part of xi(P) - 1 for link l in normalized variables q = p / sqrt(Pt).
QcqpConstraint link_constraint(const SubproblemCoefficients& coeffs, int l, const Layout& lay,
                               double power_budget) {
    const DecodingLink& link = coeffs.plan.links[static_cast<std::size_t>(l)];
    const LinkCoefficients& c = coeffs.links[static_cast<std::size_t>(l)];
    const int n = lay.n_tx;
    QcqpConstraint out;
    out.block = power_budget * lift(c.psi.matrix());
    out.offsets.push_back(lay.stream_offset[static_cast<std::size_t>(link.stream)]);
    for (int i : link.interferers) out.offsets.push_back(lay.stream_offset[static_cast<std::size_t>(i)]);
    out.linear = RVector::Zero(lay.dimension);
    const int d = lay.stream_offset[static_cast<std::size_t>(link.stream)];
    const double scale = -2.0 * std::sqrt(power_budget);
    out.linear.segment(d, n) = scale * c.f.real();
    out.linear.segment(d + n, n) = scale * c.f.imag();
    out.constant = c.t + c.u - c.v - 1.0;
    out.label = "link" + std::to_string(l);
    return out;
}

QcqpConstraint power_constraint(const Layout& lay) {
    QcqpConstraint out;
    out.block = RMatrix::Identity(2 * lay.n_tx, 2 * lay.n_tx);
    for (int s : lay.streams) out.offsets.push_back(lay.stream_offset[static_cast<std::size_t>(s)]);
    out.linear = RVector::Zero(lay.dimension);
    out.constant = -1.0;
    out.label = "power";
    return out;
}

QcqpProblem build_problem(const SubproblemCoefficients& coeffs, const Layout& lay, double power_budget) {
    const bool with_common = lay.share_offset >= 0;
    QcqpProblem prob;
    prob.dimension = lay.dimension;
    prob.objective = RVector::Zero(lay.dimension);
    prob.objective(lay.rate_index) = -1.0;
    for (int l = 0; l < static_cast<int>(coeffs.links.size()); ++l) {
        const DecodingLink& link = coeffs.plan.links[static_cast<std::size_t>(l)];
        if (link.role == LinkRole::kCommonShare && !with_common) continue;
        QcqpConstraint c = link_constraint(coeffs, l, lay, power_budget);
        switch (link.role) {
            case LinkRole::kCommonShare:
                c.linear.segment(lay.share_offset, lay.users).array() += 1.0;
                break;
            case LinkRole::kPrivateWithShare:
                if (with_common) c.linear(lay.share_offset + link.user) -= 1.0;
                c.linear(lay.rate_index) += 1.0;
                break;
            case LinkRole::kPlain:
                c.linear(lay.rate_index) += 1.0;
                break;
        }
        prob.constraints.push_back(std::move(c));
    }
    if (with_common) {
        for (int k = 0; k < lay.users; ++k) {
            QcqpConstraint c;
            c.linear = RVector::Zero(lay.dimension);
            c.linear(lay.share_offset + k) = -1.0;
            c.label = "share" + std::to_string(k);
            prob.constraints.push_back(std::move(c));
        }
    }
    prob.constraints.push_back(power_constraint(lay));
    return prob;
}

RVector initial_streams(const Layout& lay, const SubproblemOptions& options, double power_budget) {
    RVector q = RVector::Zero(lay.rate_index);
    if (!options.warm_start) return q;
    const CMatrix& p = options.warm_start->streams();
    if (p.rows() != lay.n_tx || p.cols() != lay.users + 1) return q;
    const double scale = 1.0 / std::sqrt(power_budget);
    for (int s : lay.streams) {
        const int off = lay.stream_offset[static_cast<std::size_t>(s)];
        q.segment(off, lay.n_tx) = scale * p.col(s).real();
        q.segment(off + lay.n_tx, lay.n_tx) = scale * p.col(s).imag();
    }
    const double power = q.squaredNorm();
    constexpr double kInterior = 1.0 - 1e-4;
    if (power > kInterior) q *= std::sqrt(kInterior / power);
    return q;
}

// Smallest common-link slack 1 - xi at q (ignores the share terms).
double common_margin(const SubproblemCoefficients& coeffs, const Layout& lay, double power_budget,
                     const RVector& q_full) {
    double margin = std::numeric_limits<double>::infinity();
    for (int l = 0; l < static_cast<int>(coeffs.links.size()); ++l) {
        if (coeffs.plan.links[static_cast<std::size_t>(l)].role != LinkRole::kCommonShare) continue;
        QcqpConstraint c = link_constraint(coeffs, l, lay, power_budget);
        margin = std::min(margin, -c.value(q_full));
    }
    return margin;
}

// Phase one over the precoders only: minimize s subject to
// xi_common(q) - 1 <= s and ||q||^2 - 1 <= s. Returns q with s < 0, or
// nothing when the common constraints have no strict interior.
std::optional<RVector> find_common_interior(const SubproblemCoefficients& coeffs, const Layout& lay,
                                            double power_budget, const RVector& q0,
                                            const BarrierSettings& base) {
    const int nq = lay.rate_index;
    QcqpProblem prob;
    prob.dimension = nq + 1;
    prob.objective = RVector::Zero(nq + 1);
    prob.objective(nq) = 1.0;

    auto shrink = [&](QcqpConstraint c) {
        QcqpConstraint out = std::move(c);
        RVector lin = RVector::Zero(nq + 1);
        lin.head(nq) = out.linear.head(nq);
        lin(nq) = -1.0;
        out.linear = std::move(lin);
        return out;
    };
    for (int l = 0; l < static_cast<int>(coeffs.links.size()); ++l)
        if (coeffs.plan.links[static_cast<std::size_t>(l)].role == LinkRole::kCommonShare)
            prob.constraints.push_back(shrink(link_constraint(coeffs, l, lay, power_budget)));
    prob.constraints.push_back(shrink(power_constraint(lay)));

    RVector x(nq + 1);
    x.head(nq) = q0.head(nq);
    x(nq) = 0.0;
    double worst = -std::numeric_limits<double>::infinity();
    for (const QcqpConstraint& c : prob.constraints) worst = std::max(worst, c.value(x));
    x(nq) = worst + 1.0;

    BarrierSettings settings = base;
    settings.stop_below = -1e-3;
    const QcqpResult r = solve_qcqp(prob, x, settings);
    if (r.status == SolverStatus::kNumericalFailure) return std::nullopt;
    if (!(r.x(nq) < -1e-9)) return std::nullopt;
    return RVector(r.x.head(nq));
}

RVector full_vector(const Layout& lay, const RVector& q) {
    RVector x = RVector::Zero(lay.dimension);
    x.head(lay.rate_index) = q.head(lay.rate_index);
    return x;
}

SubproblemSolution solve_with_layout(const SubproblemCoefficients& coeffs, const Layout& lay,
                                     double power_budget, const RVector& q_start,
                                     const BarrierSettings& settings) {
    const QcqpProblem prob = build_problem(coeffs, lay, power_budget);
    RVector x = full_vector(lay, q_start);

    if (lay.share_offset >= 0) {
        const double margin = common_margin(coeffs, lay, power_budget, x);
        x.segment(lay.share_offset, lay.users).setConstant(margin / (2.0 * lay.users));
    }
    // r strictly below every rate constraint.
    double r_max = std::numeric_limits<double>::infinity();
    for (const QcqpConstraint& c : prob.constraints) {
        const double coef = c.linear(lay.rate_index);
        if (coef > 0.0) r_max = std::min(r_max, -c.value(x) / coef);
    }
    x(lay.rate_index) = std::isfinite(r_max) ? r_max - 1.0 : 0.0;

    const QcqpResult res = solve_qcqp(prob, x, settings);

    SubproblemSolution sol;
    sol.status = res.status;
    sol.kkt = res.kkt;
    sol.newton_iterations = res.newton_iterations;
    sol.objective = res.x(lay.rate_index);
    sol.max_constraint = prob.max_violation(res.x);
    sol.precoders = PrecoderSet(lay.n_tx, lay.users);
    const double scale = std::sqrt(power_budget);
    for (int s : lay.streams) {
        const int off = lay.stream_offset[static_cast<std::size_t>(s)];
        for (int i = 0; i < lay.n_tx; ++i)
            sol.precoders.streams()(i, s) = scale * cdouble(res.x(off + i), res.x(off + lay.n_tx + i));
    }
    if (lay.share_offset >= 0)
        for (int k = 0; k < lay.users; ++k)
            sol.precoders.common_rates()(k) = std::max(0.0, res.x(lay.share_offset + k));
    return sol;
}

}  // namespace

SubproblemSolution solve_convex_subproblem(const SubproblemCoefficients& coeffs, double power_budget,
                                           const SubproblemOptions& options) {
    if (!(power_budget > 0.0)) throw PreconditionError("solve_convex_subproblem: power budget must be positive");
    if (coeffs.links.size() != coeffs.plan.links.size())
        throw PreconditionError("solve_convex_subproblem: coefficient count does not match plan");

    if (coeffs.plan.uses_common_stream()) {
        const Layout lay = make_layout(coeffs, true);
        RVector q = initial_streams(lay, options, power_budget);
        if (!(common_margin(coeffs, lay, power_budget, full_vector(lay, q)) > 1e-9)) {
            if (auto interior = find_common_interior(coeffs, lay, power_budget, q, options.barrier))
                q = *interior;
            else
                q.resize(0);
        }
        if (q.size() > 0) return solve_with_layout(coeffs, lay, power_budget, q, options.barrier);
    }

    const Layout lay = make_layout(coeffs, false);
    SubproblemSolution sol =
        solve_with_layout(coeffs, lay, power_budget, initial_streams(lay, options, power_budget), options.barrier);
    sol.common_stream_disabled = coeffs.plan.uses_common_stream();
    return sol;
}

// ---------------------------------------------------------------------------

namespace {

const char* role_name(LinkRole r) {
    switch (r) {
        case LinkRole::kCommonShare: return "common";
        case LinkRole::kPrivateWithShare: return "private";
        case LinkRole::kPlain: return "plain";
    }
    return "?";
}

LinkRole parse_role(const std::string& s) {
    if (s == "common") return LinkRole::kCommonShare;
    if (s == "private") return LinkRole::kPrivateWithShare;
    if (s == "plain") return LinkRole::kPlain;
    throw std::runtime_error("read_subproblem: unknown link role '" + s + "'");
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void expect(std::istream& is, const std::string& word) {
    std::string w;
    if (!(is >> w) || w != word) throw std::runtime_error("read_subproblem: expected '" + word + "'");
}

}  // namespace

void write_subproblem(std::ostream& os, const SubproblemCoefficients& coeffs, double power_budget) {
    const LinkPlan& plan = coeffs.plan;
    os << "rsmastat-subproblem 1\n"
       << "strategy " << to_string(plan.strategy) << '\n'
       << "n_tx " << coeffs.n_tx << '\n'
       << "users " << plan.users << '\n'
       << "power_budget " << num(power_budget) << '\n'
       << "decoding_order " << plan.decoding_order.size();
    for (int k : plan.decoding_order) os << ' ' << k;
    os << "\nlinks " << plan.links.size() << '\n';
    for (std::size_t l = 0; l < plan.links.size(); ++l) {
        const DecodingLink& link = plan.links[l];
        const LinkCoefficients& c = coeffs.links[l];
        os << "link " << l << " user " << link.user << " stream " << link.stream << " role "
           << role_name(link.role) << " interferers " << link.interferers.size();
        for (int i : link.interferers) os << ' ' << i;
        os << '\n' << "t " << num(c.t) << " u " << num(c.u) << " v " << num(c.v) << '\n' << "f";
        for (int i = 0; i < coeffs.n_tx; ++i) os << ' ' << num(c.f(i).real()) << ' ' << num(c.f(i).imag());
        os << "\npsi\n";
        for (int i = 0; i < coeffs.n_tx; ++i) {
            for (int j = 0; j < coeffs.n_tx; ++j) {
                if (j) os << ' ';
                os << num(c.psi(i, j).real()) << ' ' << num(c.psi(i, j).imag());
            }
            os << '\n';
        }
    }
}

SubproblemCoefficients read_subproblem(std::istream& is, double* power_budget) {
    expect(is, "rsmastat-subproblem");
    int version = 0;
    if (!(is >> version) || version != 1) throw std::runtime_error("read_subproblem: unsupported version");
    std::string strategy;
    int n_tx = 0, users = 0;
    double budget = 0.0;
    std::size_t order_size = 0, n_links = 0;
    expect(is, "strategy");
    is >> strategy;
    expect(is, "n_tx");
    is >> n_tx;
    expect(is, "users");
    is >> users;
    expect(is, "power_budget");
    is >> budget;
    expect(is, "decoding_order");
    is >> order_size;
    SubproblemCoefficients out;
    out.n_tx = n_tx;
    out.plan.strategy = parse_strategy(strategy);
    out.plan.users = users;
    out.plan.decoding_order.resize(order_size);
    for (int& k : out.plan.decoding_order) is >> k;
    expect(is, "links");
    is >> n_links;
    if (!is || n_tx < 1 || users < 1) throw std::runtime_error("read_subproblem: bad header");
    for (std::size_t l = 0; l < n_links; ++l) {
        DecodingLink link;
        std::size_t idx = 0, n_int = 0;
        std::string role;
        expect(is, "link");
        is >> idx;
        expect(is, "user");
        is >> link.user;
        expect(is, "stream");
        is >> link.stream;
        expect(is, "role");
        is >> role;
        link.role = parse_role(role);
        expect(is, "interferers");
        is >> n_int;
        link.interferers.resize(n_int);
        for (int& i : link.interferers) is >> i;
        LinkCoefficients c;
        expect(is, "t");
        is >> c.t;
        expect(is, "u");
        is >> c.u;
        expect(is, "v");
        is >> c.v;
        expect(is, "f");
        c.f.resize(n_tx);
        for (int i = 0; i < n_tx; ++i) {
            double re = 0.0, im = 0.0;
            is >> re >> im;
            c.f(i) = cdouble(re, im);
        }
        expect(is, "psi");
        CMatrix psi(n_tx, n_tx);
        for (int i = 0; i < n_tx; ++i)
            for (int j = 0; j < n_tx; ++j) {
                double re = 0.0, im = 0.0;
                is >> re >> im;
                psi(i, j) = cdouble(re, im);
            }
        if (!is) throw std::runtime_error("read_subproblem: truncated link block");
        c.psi = HermitianMatrix(psi);
        out.plan.links.push_back(std::move(link));
        out.links.push_back(std::move(c));
    }
    if (power_budget) *power_budget = budget;
    return out;
}

}  // namespace rsmastat
