#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace oracle {

using rsmastat::CMatrix;
using rsmastat::DecodingLink;
using rsmastat::LinkPlan;
using rsmastat::LinkRole;
using rsmastat::SampleSet;

CMatrix Gen::cmatrix(int rows, int cols) {
    CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = cgauss();
    return m;
}

SampleSet Gen::samples(int n_tx, int users, int count) {
    std::vector<CMatrix> v;
    for (int s = 0; s < count; ++s) v.push_back(cmatrix(n_tx, users));
    return SampleSet(n_tx, users, std::move(v), {0, "oracle-mt19937_64"});
}

rsmastat::PrecoderSet Gen::precoders(int n_tx, int users, double power, bool with_common) {
    CMatrix streams = cmatrix(n_tx, users + 1);
    if (!with_common) streams.col(0).setZero();
    double norm2 = 0.0;
    for (int j = 0; j < streams.cols(); ++j)
        for (int i = 0; i < n_tx; ++i) norm2 += std::norm(streams(i, j));
    streams *= std::sqrt(power / norm2);
    rsmastat::RVector shares(users);
    for (int k = 0; k < users; ++k) shares(k) = with_common ? uniform(0.0, 0.3) : 0.0;
    return rsmastat::PrecoderSet(streams, shares);
}

cd inner(const CMatrix& h, int user, const CMatrix& streams, int stream) {
    cd acc = 0.0;
    for (int i = 0; i < h.rows(); ++i) acc += std::conj(h(i, user)) * streams(i, stream);
    return acc;
}

double gain2(const CMatrix& h, int user, const CMatrix& streams, int stream) {
    return std::norm(inner(h, user, streams, stream));
}

Rates rsma_rates(const CMatrix& h, const CMatrix& streams) {
    const int k_users = static_cast<int>(h.cols());
    Rates r;
    for (int k = 0; k < k_users; ++k) {
        double privates = 0.0;
        for (int j = 0; j < k_users; ++j) privates += gain2(h, k, streams, j + 1);
        const double gc = gain2(h, k, streams, 0) / (privates + 1.0);
        const double own = gain2(h, k, streams, k + 1);
        const double gp = own / (privates - own + 1.0);
        r.common_sinr.push_back(gc);
        r.private_sinr.push_back(gp);
        r.common_rate.push_back(std::log2(1.0 + gc));
        r.private_rate.push_back(std::log2(1.0 + gp));
    }
    return r;
}

double link_rate(const CMatrix& h, const CMatrix& streams, const DecodingLink& link) {
    double noise = 1.0;
    for (int i : link.interferers) noise += gain2(h, link.user, streams, i);
    return std::log2(1.0 + gain2(h, link.user, streams, link.stream) / noise);
}

double link_mse(const CMatrix& h, const CMatrix& streams, const DecodingLink& link, cd g) {
    double total = 1.0 + gain2(h, link.user, streams, link.stream);
    for (int i : link.interferers) total += gain2(h, link.user, streams, i);
    const cd a = inner(h, link.user, streams, link.stream);
    return std::norm(g) * total - 2.0 * std::real(g * a) + 1.0;
}

double direct_saf_wmse(const SampleSet& samples, const LinkPlan& plan, const rsmastat::EqualizerWeightState& state,
                       int link, const CMatrix& streams) {
    double acc = 0.0;
    for (int s = 0; s < samples.size(); ++s) {
        const double u = state.weight(s, link);
        const double e = link_mse(samples[s], streams, plan.links[static_cast<std::size_t>(link)],
                                  state.equalizer(s, link));
        acc += u * e - std::log2(u);
    }
    return acc / samples.size();
}

double split_by_bisection(double budget, const std::vector<double>& priv) {
    const double lo0 = *std::min_element(priv.begin(), priv.end());
    if (budget <= 0.0) return lo0;
    double lo = lo0, hi = lo0 + budget + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        double need = 0.0;
        for (double p : priv) need += std::max(0.0, mid - p);
        (need <= budget ? lo : hi) = mid;
    }
    return lo;
}

double mmf_optimal_split_direct(const SampleSet& samples, const LinkPlan& plan, const CMatrix& streams) {
    std::vector<double> mean(plan.links.size(), 0.0);
    for (int s = 0; s < samples.size(); ++s)
        for (std::size_t l = 0; l < plan.links.size(); ++l) mean[l] += link_rate(samples[s], streams, plan.links[l]);
    for (double& m : mean) m /= samples.size();

    double budget = std::numeric_limits<double>::infinity();
    bool any_common = false;
    std::vector<double> per_user(static_cast<std::size_t>(plan.users), std::numeric_limits<double>::infinity());
    for (std::size_t l = 0; l < plan.links.size(); ++l) {
        const DecodingLink& link = plan.links[l];
        if (link.role == LinkRole::kCommonShare) {
            budget = std::min(budget, mean[l]);
            any_common = true;
        } else {
            auto& slot = per_user[static_cast<std::size_t>(link.user)];
            slot = std::min(slot, mean[l]);
        }
    }
    if (!any_common) return *std::min_element(per_user.begin(), per_user.end());
    return split_by_bisection(budget, per_user);
}

namespace {

struct N1K2 {
    // Link order of the RSMA plan: common (user 0), common (user 1), private 0, private 1.
    double psi[4], t[4], u[4], v[4];
    cd f[4];
    double power;

    double value(double xc, double th, double x1, double x2) const {
        const double ac = std::sqrt(power * xc), a1 = std::sqrt(power * x1), a2 = std::sqrt(power * x2);
        const cd pc = std::polar(ac, th);
        const double all = ac * ac + a1 * a1 + a2 * a2;
        double xi[4];
        for (int l = 0; l < 2; ++l)
            xi[l] = psi[l] * all + t[l] - 2.0 * std::real(std::conj(f[l]) * pc) + u[l] - v[l];
        // Private p_k aligned with f of its own link; the other user's private interferes.
        xi[2] = psi[2] * (a1 * a1 + a2 * a2) + t[2] - 2.0 * std::abs(f[2]) * a1 + u[2] - v[2];
        xi[3] = psi[3] * (a1 * a1 + a2 * a2) + t[3] - 2.0 * std::abs(f[3]) * a2 + u[3] - v[3];
        const double budget = std::min(1.0 - xi[0], 1.0 - xi[1]);
        return split_by_bisection(budget, {1.0 - xi[2], 1.0 - xi[3]});
    }
};

void sweep(const N1K2& p, double c0, double c1, double c2, double c3, double span_x, double span_th, int n,
           double& best, double best_arg[4], int& evals) {
    const double centre[4] = {c0, c1, c2, c3};
    for (int i = 0; i <= n; ++i) {
        const double xc = std::clamp(centre[0] + span_x * (2.0 * i / n - 1.0), 0.0, 1.0);
        for (int j = 0; j <= n; ++j) {
            const double th = centre[1] + span_th * (2.0 * j / n - 1.0);
            for (int a = 0; a <= n; ++a) {
                const double x1 = std::clamp(centre[2] + span_x * (2.0 * a / n - 1.0), 0.0, 1.0);
                for (int b = 0; b <= n; ++b) {
                    const double x2 = std::clamp(centre[3] + span_x * (2.0 * b / n - 1.0), 0.0, 1.0);
                    if (xc + x1 + x2 > 1.0) continue;
                    const double val = p.value(xc, th, x1, x2);
                    ++evals;
                    if (val > best) {
                        best = val;
                        best_arg[0] = xc;
                        best_arg[1] = th;
                        best_arg[2] = x1;
                        best_arg[3] = x2;
                    }
                }
            }
        }
    }
}

}  // namespace

GridResult grid_search_n1k2(const rsmastat::SubproblemCoefficients& coeffs, double power_budget) {
    N1K2 p{};
    p.power = power_budget;
    for (int l = 0; l < 4; ++l) {
        const auto& lc = coeffs.links[static_cast<std::size_t>(l)];
        p.psi[l] = lc.psi(0, 0).real();
        p.t[l] = lc.t;
        p.u[l] = lc.u;
        p.v[l] = lc.v;
        p.f[l] = lc.f(0);
    }
    GridResult out;
    double best = -std::numeric_limits<double>::infinity();
    double arg[4] = {0.0, 0.0, 0.0, 0.0};
    sweep(p, 0.5, std::numbers::pi, 0.5, 0.5, 0.5, std::numbers::pi, 36, best, arg, out.evaluations);
    double sx = 1.0 / 36.0, sth = std::numbers::pi / 18.0;
    for (int round = 0; round < 10; ++round) {
        sweep(p, arg[0], arg[1], arg[2], arg[3], 2.0 * sx, 2.0 * sth, 12, best, arg, out.evaluations);
        sx *= 0.4;
        sth *= 0.4;
    }
    out.objective = best;
    return out;
}

}  // namespace oracle
