#include "rsmastat/ratecore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace rsmastat {

PrecoderSet::PrecoderSet(int n_tx, int users)
    : streams_(CMatrix::Zero(n_tx, users + 1)), common_rates_(RVector::Zero(users)) {
    if (n_tx < 1 || users < 1) throw PreconditionError("PrecoderSet: dimensions must be positive");
}

PrecoderSet::PrecoderSet(CMatrix streams, RVector common_rates)
    : streams_(std::move(streams)), common_rates_(std::move(common_rates)) {
    if (streams_.rows() < 1 || streams_.cols() < 2)
        throw PreconditionError("PrecoderSet: need n_tx >= 1 and K+1 >= 2 stream columns");
    if (common_rates_.size() != streams_.cols() - 1)
        throw PreconditionError("PrecoderSet: common-rate vector must have K entries");
}

void PrecoderSet::validate(double power_budget) const {
    const double p = total_power();
    if (p > power_budget + kPowerSlack) {
        std::ostringstream os;
        os << "PrecoderSet: total power " << p << " exceeds budget " << power_budget;
        throw PreconditionError(os.str());
    }
    for (Eigen::Index k = 0; k < common_rates_.size(); ++k)
        if (common_rates_(k) < 0.0) throw PreconditionError("PrecoderSet: negative common-rate share");
}

namespace {

double interference_excluding(const CVector& h, const CMatrix& streams, int skip_stream) {
    double s = 0.0;
    for (Eigen::Index i = 1; i < streams.cols(); ++i)
        if (i != skip_stream) s += std::norm(h.dot(streams.col(i)));
    return s;
}

}  // namespace

SinrPair compute_sinrs(const CVector& h, const PrecoderSet& precoders, int user) {
    const CMatrix& p = precoders.streams();
    const double common_gain = std::norm(h.dot(p.col(0)));  // |h^H p_c|^2
    const double own_gain = std::norm(h.dot(p.col(user + 1)));
    const double others = interference_excluding(h, p, user + 1);
    return {common_gain / (own_gain + others + 1.0), own_gain / (others + 1.0)};
}

EqualizerPair mmse_equalizers(const CVector& h, const PrecoderSet& precoders, int user) {
    const CMatrix& p = precoders.streams();
    const cdouble yc = h.dot(p.col(0));
    const cdouble yk = h.dot(p.col(user + 1));
    const double t_private = std::norm(yk) + interference_excluding(h, p, user + 1) + 1.0;
    const double t_common = std::norm(yc) + t_private;
    return {std::conj(yc) / t_common, std::conj(yk) / t_private};
}

MsePair mse(const CVector& h, const PrecoderSet& precoders, int user, cdouble g_common,
            cdouble g_private) {
    const CMatrix& p = precoders.streams();
    const cdouble yc = h.dot(p.col(0));
    const cdouble yk = h.dot(p.col(user + 1));
    const double t_private = std::norm(yk) + interference_excluding(h, p, user + 1) + 1.0;
    const double t_common = std::norm(yc) + t_private;
    return {std::norm(g_common) * t_common - 2.0 * (g_common * yc).real() + 1.0,
            std::norm(g_private) * t_private - 2.0 * (g_private * yk).real() + 1.0};
}

WeightPair mmse_weights(double mse_common, double mse_private) {
    if (!(mse_common > 0.0) || !(mse_private > 0.0))
        throw PreconditionError("mmse_weights: MSE must be positive");
    return {1.0 / mse_common, 1.0 / mse_private};
}

double wmse(double mse_value, double weight) {
    return weight * mse_value - std::log2(weight);
}

PerSampleRates per_sample_rates(const CMatrix& channel, const PrecoderSet& precoders) {
    const int k_users = precoders.users();
    PerSampleRates out{RVector(k_users), RVector(k_users), RVector(k_users), RVector(k_users)};
    for (int k = 0; k < k_users; ++k) {
        const SinrPair g = compute_sinrs(channel.col(k), precoders, k);
        out.common_sinrs(k) = g.common;
        out.private_sinrs(k) = g.priv;
        out.common_rates(k) = std::log2(1.0 + g.common);
        out.private_rates(k) = std::log2(1.0 + g.priv);
    }
    return out;
}

SafRates saf_rates(const SampleSet& samples, const PrecoderSet& precoders) {
    const int k_users = precoders.users();
    SafRates out{RVector::Zero(k_users), RVector::Zero(k_users), 0.0};
    for (int s = 0; s < samples.size(); ++s) {
        const PerSampleRates r = per_sample_rates(samples[s], precoders);
        out.common += r.common_rates;
        out.priv += r.private_rates;
    }
    out.common /= static_cast<double>(samples.size());
    out.priv /= static_cast<double>(samples.size());
    out.common_rate = out.common.minCoeff();
    return out;
}

MmfEvaluation mmf_objective(const SampleSet& samples, const PrecoderSet& precoders) {
    const SafRates r = saf_rates(samples, precoders);
    const RVector& c = precoders.common_rates();
    MmfEvaluation out;
    out.value = (c + r.priv).minCoeff();
    out.feasible = c.sum() <= r.common_rate + kCommonRateSlack;
    return out;
}

double best_common_split(double common_budget, const RVector& private_rates, RVector* allocation) {
    const Eigen::Index k = private_rates.size();
    std::vector<double> sorted(private_rates.data(), private_rates.data() + k);
    std::sort(sorted.begin(), sorted.end());
    double level = sorted.front();
    if (common_budget > 0.0) {
        // Raise the water level over the m lowest users until the budget is spent.
        double spent = 0.0;
        level = sorted[0];
        for (Eigen::Index m = 1; m <= k; ++m) {
            const double next = m < k ? sorted[static_cast<std::size_t>(m)]
                                      : std::numeric_limits<double>::infinity();
            const double cost = static_cast<double>(m) * (next - level);
            if (spent + cost >= common_budget) {
                level += (common_budget - spent) / static_cast<double>(m);
                break;
            }
            spent += cost;
            level = next;
        }
    }
    if (allocation) {
        allocation->resize(k);
        for (Eigen::Index i = 0; i < k; ++i)
            (*allocation)(i) = common_budget > 0.0 ? std::max(0.0, level - private_rates(i)) : 0.0;
    }
    return level;
}

// ---------------------------------------------------------------------------

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::kRsma: return "rsma";
        case Strategy::kSdma: return "sdma";
        case Strategy::kNoma: return "noma";
    }
    return "?";
}

Strategy parse_strategy(const std::string& name) {
    if (name == "rsma") return Strategy::kRsma;
    if (name == "sdma") return Strategy::kSdma;
    if (name == "noma") return Strategy::kNoma;
    throw PreconditionError("unknown strategy '" + name + "' (expected rsma, sdma or noma)");
}

bool LinkPlan::uses_common_stream() const {
    return std::any_of(links.begin(), links.end(),
                       [](const DecodingLink& l) { return l.role == LinkRole::kCommonShare; });
}

std::vector<int> LinkPlan::active_streams() const {
    std::set<int> s;
    for (const DecodingLink& l : links) {
        s.insert(l.stream);
        s.insert(l.interferers.begin(), l.interferers.end());
    }
    return {s.begin(), s.end()};
}

LinkPlan LinkPlan::rsma(int users) {
    if (users < 1) throw PreconditionError("LinkPlan::rsma: need at least one user");
    LinkPlan plan;
    plan.strategy = Strategy::kRsma;
    plan.users = users;
    std::vector<int> all_private(static_cast<std::size_t>(users));
    std::iota(all_private.begin(), all_private.end(), 1);
    for (int k = 0; k < users; ++k) plan.links.push_back({k, 0, all_private, LinkRole::kCommonShare});
    for (int k = 0; k < users; ++k) {
        std::vector<int> others;
        for (int j = 0; j < users; ++j)
            if (j != k) others.push_back(j + 1);
        plan.links.push_back({k, k + 1, std::move(others), LinkRole::kPrivateWithShare});
    }
    return plan;
}

LinkPlan LinkPlan::sdma(int users) {
    LinkPlan plan = rsma(users);
    plan.strategy = Strategy::kSdma;
    plan.links.erase(plan.links.begin(), plan.links.begin() + users);
    for (DecodingLink& l : plan.links) l.role = LinkRole::kPlain;
    return plan;
}

LinkPlan LinkPlan::noma(std::vector<int> order) {
    const int users = static_cast<int>(order.size());
    if (users < 1) throw PreconditionError("LinkPlan::noma: need at least one user");
    std::vector<int> check = order;
    std::sort(check.begin(), check.end());
    for (int k = 0; k < users; ++k)
        if (check[static_cast<std::size_t>(k)] != k)
            throw PreconditionError("LinkPlan::noma: decoding order must be a permutation of users");
    LinkPlan plan;
    plan.strategy = Strategy::kNoma;
    plan.users = users;
    for (int j = 0; j < users; ++j) {
        const int stream = order[static_cast<std::size_t>(j)] + 1;
        std::vector<int> stronger;
        for (int i = 0; i < j; ++i) stronger.push_back(order[static_cast<std::size_t>(i)] + 1);
        for (int d = 0; d <= j; ++d)
            plan.links.push_back({order[static_cast<std::size_t>(d)], stream, stronger, LinkRole::kPlain});
    }
    plan.decoding_order = std::move(order);
    return plan;
}

EqualizerWeightState::EqualizerWeightState(int samples, int links)
    : samples_(samples), links_(links),
      g_(static_cast<std::size_t>(samples) * static_cast<std::size_t>(links), cdouble(0.0)),
      u_(static_cast<std::size_t>(samples) * static_cast<std::size_t>(links), 1.0) {}

CMatrix stream_gains(const CMatrix& channel, const PrecoderSet& precoders) {
    return channel.adjoint() * precoders.streams();
}

LinkTerms link_terms(const CMatrix& gains, const DecodingLink& link) {
    LinkTerms t;
    t.desired = gains(link.user, link.stream);
    double interference = 1.0;
    for (int i : link.interferers) interference += std::norm(gains(link.user, i));
    t.interference = interference;
    t.total = interference + std::norm(t.desired);
    return t;
}

EqualizerWeightState mmse_update(const SampleSet& samples, const LinkPlan& plan,
                                 const PrecoderSet& precoders) {
    const int n_links = static_cast<int>(plan.links.size());
    EqualizerWeightState state(samples.size(), n_links);
    for (int s = 0; s < samples.size(); ++s) {
        const CMatrix gains = stream_gains(samples[s], precoders);
        for (int l = 0; l < n_links; ++l) {
            const LinkTerms t = link_terms(gains, plan.links[static_cast<std::size_t>(l)]);
            state.equalizer(s, l) = std::conj(t.desired) / t.total;
            // MMSE = I / T, so the weight is T / I.
            state.weight(s, l) = t.total / t.interference;
        }
    }
    return state;
}

RVector saf_link_rates(const SampleSet& samples, const LinkPlan& plan, const PrecoderSet& precoders) {
    const int n_links = static_cast<int>(plan.links.size());
    RVector rates = RVector::Zero(n_links);
    for (int s = 0; s < samples.size(); ++s) {
        const CMatrix gains = stream_gains(samples[s], precoders);
        for (int l = 0; l < n_links; ++l) {
            const LinkTerms t = link_terms(gains, plan.links[static_cast<std::size_t>(l)]);
            rates(l) += std::log2(1.0 + std::norm(t.desired) / t.interference);
        }
    }
    return rates / static_cast<double>(samples.size());
}

MmfEvaluation mmf_from_link_rates(const LinkPlan& plan, const RVector& link_rates,
                                  const RVector& common_rates) {
    MmfEvaluation out;
    double value = std::numeric_limits<double>::infinity();
    double common_budget = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < plan.links.size(); ++l) {
        const DecodingLink& link = plan.links[l];
        const double r = link_rates(static_cast<Eigen::Index>(l));
        switch (link.role) {
            case LinkRole::kCommonShare: common_budget = std::min(common_budget, r); break;
            case LinkRole::kPrivateWithShare: value = std::min(value, common_rates(link.user) + r); break;
            case LinkRole::kPlain: value = std::min(value, r); break;
        }
    }
    out.value = value;
    if (plan.uses_common_stream()) out.feasible = common_rates.sum() <= common_budget + kCommonRateSlack;
    return out;
}

MmfEvaluation mmf_objective(const SampleSet& samples, const LinkPlan& plan,
                            const PrecoderSet& precoders) {
    return mmf_from_link_rates(plan, saf_link_rates(samples, plan, precoders), precoders.common_rates());
}

double mmf_with_optimal_split(const SampleSet& samples, const LinkPlan& plan,
                              const PrecoderSet& precoders, RVector* shares) {
    const RVector rates = saf_link_rates(samples, plan, precoders);
    if (!plan.uses_common_stream()) {
        if (shares) *shares = RVector::Zero(plan.users);
        return mmf_from_link_rates(plan, rates, precoders.common_rates()).value;
    }
    double budget = std::numeric_limits<double>::infinity();
    RVector priv = RVector::Constant(plan.users, std::numeric_limits<double>::infinity());
    for (std::size_t l = 0; l < plan.links.size(); ++l) {
        const DecodingLink& link = plan.links[l];
        const double r = rates(static_cast<Eigen::Index>(l));
        if (link.role == LinkRole::kCommonShare)
            budget = std::min(budget, r);
        else
            priv(link.user) = std::min(priv(link.user), r);
    }
    return best_common_split(budget, priv, shares);
}

}  // namespace rsmastat
