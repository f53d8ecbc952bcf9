#pragma once

// Per-sample SINR/rate/MSE algebra, closed-form MMSE equalizers and weights,
// and sample-average aggregation.
//
// Conventions: noise variance is 1, so the transmit SNR equals the power
// budget; all logarithms are base 2 (rates in bit/s/Hz). Users are indexed
// 0..K-1. Precoder streams are indexed 0..K with stream 0 the common stream
// and stream k+1 the private stream of user k.

#include <string>
#include <vector>

#include "rsmastat/channels.hpp"
#include "rsmastat/matcore.hpp"

namespace rsmastat {

inline constexpr double kPowerSlack = 1e-9;
inline constexpr double kCommonRateSlack = 1e-9;

class PrecoderSet {
public:
    PrecoderSet() = default;
    /// All-zero precoders and common-rate allocation.
    PrecoderSet(int n_tx, int users);
    /// `streams` is n_tx x (K+1), column 0 common; `common_rates` has K entries.
    PrecoderSet(CMatrix streams, RVector common_rates);

    int n_tx() const { return static_cast<int>(streams_.rows()); }
    int users() const { return static_cast<int>(streams_.cols()) - 1; }

    const CMatrix& streams() const { return streams_; }
    CMatrix& streams() { return streams_; }
    auto common() const { return streams_.col(0); }
    auto common() { return streams_.col(0); }
    auto private_precoder(int user) const { return streams_.col(user + 1); }
    auto private_precoder(int user) { return streams_.col(user + 1); }

    const RVector& common_rates() const { return common_rates_; }
    RVector& common_rates() { return common_rates_; }

    double total_power() const { return streams_.squaredNorm(); }

    /// Throws PreconditionError if the power exceeds budget + 1e-9 or any
    /// common-rate share is negative.
    void validate(double power_budget) const;

private:
    CMatrix streams_;
    RVector common_rates_;
};

struct SinrPair {
    double common = 0.0;
    double priv = 0.0;
};

struct EqualizerPair {
    cdouble common;
    cdouble priv;
};

struct MsePair {
    double common = 1.0;
    double priv = 1.0;
};

struct WeightPair {
    double common = 1.0;
    double priv = 1.0;
};

/// SINRs of the common stream and of user `user`'s private stream (after
/// removing the common stream) for channel vector h.
SinrPair compute_sinrs(const CVector& h, const PrecoderSet& precoders, int user);

EqualizerPair mmse_equalizers(const CVector& h, const PrecoderSet& precoders, int user);

MsePair mse(const CVector& h, const PrecoderSet& precoders, int user, cdouble g_common,
            cdouble g_private);

/// u = 1/eps per stream. Throws PreconditionError on nonpositive MSE.
WeightPair mmse_weights(double mse_common, double mse_private);

/// u * eps - log2(u).
double wmse(double mse_value, double weight);

struct PerSampleRates {
    RVector common_rates;   // R_{c,k}
    RVector private_rates;  // R_k
    RVector common_sinrs;
    RVector private_sinrs;
};

PerSampleRates per_sample_rates(const CMatrix& channel, const PrecoderSet& precoders);

struct SafRates {
    RVector common;   // mean over samples of R_{c,k}
    RVector priv;     // mean over samples of R_k
    double common_rate = 0.0;  // min_k common(k)
};

SafRates saf_rates(const SampleSet& samples, const PrecoderSet& precoders);

struct MmfEvaluation {
    double value = 0.0;
    bool feasible = true;  // sum of shares <= achievable common rate + 1e-9
};

/// min_k (c_k + mean R_k) for the RSMA rate model.
MmfEvaluation mmf_objective(const SampleSet& samples, const PrecoderSet& precoders);

/// max over c >= 0 with sum(c) <= common_budget of min_k (c_k + private(k)).
/// Water-filling; a non-positive budget returns min_k private(k).
double best_common_split(double common_budget, const RVector& private_rates,
                         RVector* allocation = nullptr);

// ---------------------------------------------------------------------------
// Decoding links: the common machinery shared by RSMA, SDMA and SC-SIC NOMA.
//
// A link is one (receiving user, decoded stream) pair together with the set
// of streams still present as interference at that decoding step. Its role
// says how its rate enters the max-min problem.

enum class LinkRole {
    kCommonShare,       // rate must cover sum_j c_j
    kPrivateWithShare,  // c_user + rate >= r
    kPlain,             // rate >= r
};

struct DecodingLink {
    int user = 0;
    int stream = 0;
    std::vector<int> interferers;
    LinkRole role = LinkRole::kPlain;
};

enum class Strategy { kRsma, kSdma, kNoma };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

struct LinkPlan {
    Strategy strategy = Strategy::kRsma;
    int users = 0;
    std::vector<DecodingLink> links;
    std::vector<int> decoding_order;  // NOMA only: strongest user first

    bool uses_common_stream() const;
    /// Streams that carry power under this plan, ascending.
    std::vector<int> active_streams() const;

    static LinkPlan rsma(int users);
    static LinkPlan sdma(int users);
    /// SC-SIC: order[0] decodes every stream; user order[j] decodes streams
    /// order[K-1], ..., order[j] and treats order[0..j-1] as noise.
    static LinkPlan noma(std::vector<int> order);
};

/// Per-sample, per-link equalizers g and weights u, indexed (sample, link).
class EqualizerWeightState {
public:
    EqualizerWeightState() = default;
    EqualizerWeightState(int samples, int links);

    int samples() const { return samples_; }
    int links() const { return links_; }
    cdouble& equalizer(int s, int l) { return g_[index(s, l)]; }
    cdouble equalizer(int s, int l) const { return g_[index(s, l)]; }
    double& weight(int s, int l) { return u_[index(s, l)]; }
    double weight(int s, int l) const { return u_[index(s, l)]; }

private:
    std::size_t index(int s, int l) const {
        return static_cast<std::size_t>(s) * static_cast<std::size_t>(links_) + static_cast<std::size_t>(l);
    }
    int samples_ = 0;
    int links_ = 0;
    std::vector<cdouble> g_;
    std::vector<double> u_;
};

/// h_k^H p_i for every user k (rows) and stream i (columns).
CMatrix stream_gains(const CMatrix& channel, const PrecoderSet& precoders);

struct LinkTerms {
    double total = 1.0;         // T: desired + interference + noise
    double interference = 1.0;  // I: interference + noise
    cdouble desired;            // h^H p_stream
};

LinkTerms link_terms(const CMatrix& gains, const DecodingLink& link);

/// Closed-form MMSE update of every equalizer and weight at `precoders`.
EqualizerWeightState mmse_update(const SampleSet& samples, const LinkPlan& plan,
                                 const PrecoderSet& precoders);

/// Mean over samples of each link's rate.
RVector saf_link_rates(const SampleSet& samples, const LinkPlan& plan, const PrecoderSet& precoders);

/// Max-min objective of a plan from its per-link mean rates:
/// min over non-common links of (c_user [if kPrivateWithShare] + rate).
MmfEvaluation mmf_from_link_rates(const LinkPlan& plan, const RVector& link_rates,
                                  const RVector& common_rates);

MmfEvaluation mmf_objective(const SampleSet& samples, const LinkPlan& plan,
                            const PrecoderSet& precoders);

/// Out-of-sample style evaluation: precoders fixed, common-rate shares
/// re-split optimally for the given samples. Plans without a common stream
/// reduce to mmf_objective. `shares` receives the split when given.
double mmf_with_optimal_split(const SampleSet& samples, const LinkPlan& plan,
                              const PrecoderSet& precoders, RVector* shares = nullptr);

}  // namespace rsmastat
