#include "rsmastat/channels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rsmastat/rng.hpp"

namespace rsmastat {

namespace {

constexpr std::uint64_t kRayleighTag = 0x52415949ULL;  // per-sample Rayleigh streams
constexpr std::uint64_t kUlaTag = 0x554C4150ULL;
constexpr std::uint64_t kEnsembleTag = 0x454E5345ULL;
constexpr double kMagnitudeSlack = 1e-12;

cdouble ipow(cdouble t, int e) {
    cdouble r = 1.0;
    for (int i = 0; i < e; ++i) r *= t;
    return r;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw PreconditionError(what);
}

}  // namespace

void CorrelatedRayleighStats::validate() const {
    require(n_tx >= 1, "CorrelatedRayleighStats: n_tx must be >= 1");
    require(!coefficients.empty(), "CorrelatedRayleighStats: need at least one user");
    for (const cdouble& t : coefficients)
        require(std::abs(t) <= 1.0 + kMagnitudeSlack,
                "CorrelatedRayleighStats: |t_k| must lie in [0, 1]");
    require(phase_inaccuracy_half_width >= 0.0 && phase_inaccuracy_half_width <= std::numbers::pi,
            "CorrelatedRayleighStats: phase inaccuracy half-width must lie in [0, pi]");
}

void UlaPhaseStats::validate() const {
    require(n_tx >= 1, "UlaPhaseStats: n_tx must be >= 1");
    require(!amplitudes.empty(), "UlaPhaseStats: need at least one user");
    require(mean_phases.size() == amplitudes.size(),
            "UlaPhaseStats: one mean phase per amplitude required");
    for (double b : amplitudes) require(b >= 0.0, "UlaPhaseStats: amplitudes must be >= 0");
    require(phase_range >= 0.0 && phase_range <= 2.0 * std::numbers::pi + 1e-12,
            "UlaPhaseStats: phase range must lie in [0, 2 pi]");
}

int n_tx_of(const ChannelStats& stats) {
    return std::visit([](const auto& s) { return s.n_tx; }, stats);
}

int users_of(const ChannelStats& stats) {
    return std::visit([](const auto& s) { return s.users(); }, stats);
}

ChannelStats true_statistics(const ChannelStats& stats) {
    if (const auto* r = std::get_if<CorrelatedRayleighStats>(&stats)) {
        CorrelatedRayleighStats exact = *r;
        exact.phase_inaccuracy_half_width = 0.0;
        return exact;
    }
    return stats;
}

SampleSet::SampleSet(int n_tx, int users, std::vector<CMatrix> samples, SeedRecord seed)
    : n_tx_(n_tx), users_(users), samples_(std::move(samples)), seed_(std::move(seed)) {
    require(n_tx_ >= 1 && users_ >= 1, "SampleSet: dimensions must be positive");
    require(!samples_.empty(), "SampleSet: at least one sample required");
    for (const CMatrix& h : samples_)
        require(h.rows() == n_tx_ && h.cols() == users_, "SampleSet: inconsistent sample dimensions");
}

bool SampleSet::identical_to(const SampleSet& other) const {
    if (n_tx_ != other.n_tx_ || users_ != other.users_ || size() != other.size()) return false;
    if (!(seed_ == other.seed_)) return false;
    for (int s = 0; s < size(); ++s) {
        const CMatrix& a = samples_[static_cast<std::size_t>(s)];
        const CMatrix& b = other.samples_[static_cast<std::size_t>(s)];
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            // Bitwise: distinguishes -0.0 and NaN payloads only through ==, fine for samples.
            if (a.data()[i].real() != b.data()[i].real() || a.data()[i].imag() != b.data()[i].imag())
                return false;
        }
    }
    return true;
}

HermitianMatrix build_correlation_matrix(cdouble t, int n_tx) {
    require(n_tx >= 1, "build_correlation_matrix: n_tx must be >= 1");
    if (std::abs(t) > 1.0 + kMagnitudeSlack) {
        std::ostringstream os;
        os << "build_correlation_matrix: |t| = " << std::abs(t) << " exceeds 1";
        throw PreconditionError(os.str());
    }
    CMatrix r(n_tx, n_tx);
    for (int m = 0; m < n_tx; ++m) {
        for (int n = m; n < n_tx; ++n) {
            const cdouble v = ipow(t, n - m);
            r(m, n) = v;
            r(n, m) = std::conj(v);
        }
        r(m, m) = 1.0;
    }
    return HermitianMatrix(r);
}

SampleSet sample_correlated_rayleigh(const CorrelatedRayleighStats& stats, int sample_count,
                                     std::uint64_t seed) {
    stats.validate();
    require(sample_count >= 1, "sample_correlated_rayleigh: sample count must be >= 1");
    const int n = stats.n_tx;
    const int k_users = stats.users();
    const bool perturbed = stats.phase_inaccuracy_half_width > 0.0;

    std::vector<CMatrix> roots;
    if (!perturbed) {
        roots.reserve(static_cast<std::size_t>(k_users));
        for (const cdouble& t : stats.coefficients)
            roots.push_back(hermitian_sqrt(build_correlation_matrix(t, n)));
    }

    std::vector<CMatrix> samples;
    samples.reserve(static_cast<std::size_t>(sample_count));
    for (int s = 0; s < sample_count; ++s) {
        CMatrix h(n, k_users);
        for (int k = 0; k < k_users; ++k) {
            CounterRng rng = CounterRng::stream(
                seed, {kRayleighTag, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(k)});
            CMatrix root;
            if (perturbed) {
                const cdouble t = stats.coefficients[static_cast<std::size_t>(k)];
                const double delta = stats.phase_inaccuracy_half_width;
                const double phase = std::arg(t) + rng.uniform(-delta, delta);
                root = hermitian_sqrt(build_correlation_matrix(std::polar(std::abs(t), phase), n));
            }
            CVector w(n);
            for (int i = 0; i < n; ++i) w(i) = rng.complex_normal();
            h.col(k) = (perturbed ? root : roots[static_cast<std::size_t>(k)]) * w;
        }
        samples.push_back(std::move(h));
    }
    return SampleSet(n, k_users, std::move(samples),
                     SeedRecord{seed, std::string(CounterRng::kGeneratorName)});
}

SampleSet sample_ula_phase(const UlaPhaseStats& stats, int sample_count, std::uint64_t seed) {
    stats.validate();
    require(sample_count >= 1, "sample_ula_phase: sample count must be >= 1");
    const int n = stats.n_tx;
    const int k_users = stats.users();
    const double half = stats.phase_range / 2.0;

    std::vector<CMatrix> samples;
    samples.reserve(static_cast<std::size_t>(sample_count));
    for (int s = 0; s < sample_count; ++s) {
        CMatrix h(n, k_users);
        for (int k = 0; k < k_users; ++k) {
            const double mean = stats.mean_phases[static_cast<std::size_t>(k)];
            double phi = mean;
            if (half > 0.0) {
                CounterRng rng = CounterRng::stream(
                    seed, {kUlaTag, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(k)});
                phi = rng.uniform(mean - half, mean + half);
            }
            const double beta = stats.amplitudes[static_cast<std::size_t>(k)];
            // (1, e^{j phi}, ..., e^{j (N-1) phi})^H
            for (int m = 0; m < n; ++m) h(m, k) = beta * std::polar(1.0, -static_cast<double>(m) * phi);
        }
        samples.push_back(std::move(h));
    }
    return SampleSet(n, k_users, std::move(samples),
                     SeedRecord{seed, std::string(CounterRng::kGeneratorName)});
}

SampleSet sample_channels(const ChannelStats& stats, int sample_count, std::uint64_t seed) {
    if (const auto* r = std::get_if<CorrelatedRayleighStats>(&stats))
        return sample_correlated_rayleigh(*r, sample_count, seed);
    return sample_ula_phase(std::get<UlaPhaseStats>(stats), sample_count, seed);
}

std::vector<ChannelStats> draw_statistics_ensemble(const StatsTemplate& tmpl, int count,
                                                   std::uint64_t seed) {
    require(count >= 1, "draw_statistics_ensemble: count must be >= 1");
    std::vector<ChannelStats> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int d = 0; d < count; ++d) {
        CounterRng rng = CounterRng::stream(seed, {kEnsembleTag, static_cast<std::uint64_t>(d)});
        if (const auto* r = std::get_if<CorrelatedRayleighTemplate>(&tmpl)) {
            require(r->magnitude >= 0.0 && r->magnitude <= 1.0 + kMagnitudeSlack,
                    "draw_statistics_ensemble: |t| must lie in [0, 1]");
            CorrelatedRayleighStats stats;
            stats.n_tx = r->n_tx;
            stats.phase_inaccuracy_half_width = r->phase_inaccuracy_half_width;
            for (int k = 0; k < r->users; ++k) {
                const double phase = rng.uniform(r->phase_interval.lo, r->phase_interval.hi);
                stats.coefficients.push_back(std::polar(r->magnitude, phase));
            }
            stats.validate();
            out.emplace_back(std::move(stats));
        } else {
            const auto& u = std::get<UlaPhaseTemplate>(tmpl);
            UlaPhaseStats stats;
            stats.n_tx = u.n_tx;
            stats.amplitudes = u.amplitudes;
            stats.phase_range = u.phase_range;
            for (std::size_t k = 0; k < u.amplitudes.size(); ++k)
                stats.mean_phases.push_back(rng.uniform(u.mean_phase_interval.lo, u.mean_phase_interval.hi));
            stats.validate();
            out.emplace_back(std::move(stats));
        }
    }
    return out;
}

}  // namespace rsmastat
