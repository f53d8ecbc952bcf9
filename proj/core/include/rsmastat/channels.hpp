#pragma once

// Statistical channel descriptions and i.i.d. sample-set generation for the
// two transmitter-knowledge scenarios: correlated Rayleigh fading with known
// exponential transmit correlation, and a line-of-sight ULA with known
// amplitudes and a uniformly distributed phase.

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "rsmastat/matcore.hpp"

namespace rsmastat {

struct CorrelatedRayleighStats {
    int n_tx = 1;
    std::vector<cdouble> coefficients;  // t_k, |t_k| <= 1, one per user
    /// Half-width of the transmitter's uncertainty on arg(t_k); 0 means the
    /// phase is known exactly.
    double phase_inaccuracy_half_width = 0.0;

    int users() const { return static_cast<int>(coefficients.size()); }
    void validate() const;
};

struct UlaPhaseStats {
    int n_tx = 1;
    std::vector<double> amplitudes;   // beta_k >= 0
    std::vector<double> mean_phases;  // mean of phi_k, radians
    double phase_range = 0.0;         // r in [0, 2 pi]; 0 is deterministic

    int users() const { return static_cast<int>(amplitudes.size()); }
    void validate() const;
};

using ChannelStats = std::variant<CorrelatedRayleighStats, UlaPhaseStats>;

int n_tx_of(const ChannelStats& stats);
int users_of(const ChannelStats& stats);

/// The statistics a perfectly informed observer would use: identical to
/// `stats` with any transmitter-side phase inaccuracy removed.
ChannelStats true_statistics(const ChannelStats& stats);

struct SeedRecord {
    std::uint64_t seed = 0;
    std::string generator;
    bool operator==(const SeedRecord&) const = default;
};

/// S channel matrices, each n_tx x K with column k = h_k.
class SampleSet {
public:
    SampleSet() = default;
    SampleSet(int n_tx, int users, std::vector<CMatrix> samples, SeedRecord seed);

    int n_tx() const { return n_tx_; }
    int users() const { return users_; }
    int size() const { return static_cast<int>(samples_.size()); }
    const CMatrix& operator[](int s) const { return samples_[static_cast<std::size_t>(s)]; }
    const std::vector<CMatrix>& samples() const { return samples_; }
    const SeedRecord& seed_record() const { return seed_; }

    /// Exact (bitwise) equality of dimensions, entries and seed record.
    bool identical_to(const SampleSet& other) const;

private:
    int n_tx_ = 0;
    int users_ = 0;
    std::vector<CMatrix> samples_;
    SeedRecord seed_;
};

/// Exponential correlation: entry (m, n) = t^(n-m) for n >= m, Hermitian below.
HermitianMatrix build_correlation_matrix(cdouble t, int n_tx);

SampleSet sample_correlated_rayleigh(const CorrelatedRayleighStats& stats, int sample_count,
                                     std::uint64_t seed);
SampleSet sample_ula_phase(const UlaPhaseStats& stats, int sample_count, std::uint64_t seed);
SampleSet sample_channels(const ChannelStats& stats, int sample_count, std::uint64_t seed);

/// Defaults to the full circle, matching the config-file default.
struct PhaseInterval {
    double lo = -std::numbers::pi;
    double hi = std::numbers::pi;
};

struct CorrelatedRayleighTemplate {
    int n_tx = 1;
    int users = 1;
    double magnitude = 0.0;  // |t|, shared by all users
    PhaseInterval phase_interval;
    double phase_inaccuracy_half_width = 0.0;
};

struct UlaPhaseTemplate {
    int n_tx = 1;
    std::vector<double> amplitudes;
    double phase_range = 0.0;
    PhaseInterval mean_phase_interval;
};

using StatsTemplate = std::variant<CorrelatedRayleighTemplate, UlaPhaseTemplate>;

/// `count` independent statistics objects; per-user coefficient phases (or
/// mean phases) are uniform over the template interval.
std::vector<ChannelStats> draw_statistics_ensemble(const StatsTemplate& tmpl, int count,
                                                   std::uint64_t seed);

/// Text container with hexfloat entries; read(write(x)) is bit-exact.
void write_sample_set(std::ostream& os, const SampleSet& set);
SampleSet read_sample_set(std::istream& is);

}  // namespace rsmastat
