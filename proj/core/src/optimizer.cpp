#include "rsmastat/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "rsmastat/rng.hpp"

namespace rsmastat {

std::string to_string(InitPolicy p) {
    switch (p) {
        case InitPolicy::kDominantEigenvector: return "eigen";
        case InitPolicy::kRandom: return "random";
        case InitPolicy::kGiven: return "given";
    }
    return "?";
}

InitPolicy parse_init_policy(const std::string& name) {
    if (name == "eigen") return InitPolicy::kDominantEigenvector;
    if (name == "random") return InitPolicy::kRandom;
    if (name == "given") return InitPolicy::kGiven;
    throw PreconditionError("unknown initialization policy '" + name + "' (expected eigen or random)");
}

std::string to_string(AoStatus s) {
    switch (s) {
        case AoStatus::kConverged: return "converged";
        case AoStatus::kMaxIterations: return "max-iterations";
        case AoStatus::kSubproblemFailure: return "subproblem-failure";
    }
    return "?";
}

void AoConfig::validate() const {
    if (!(tolerance > 0.0)) throw PreconditionError("AoConfig: tolerance must be positive");
    if (max_iterations < 1) throw PreconditionError("AoConfig: iteration cap must be >= 1");
    if (!(common_power_fraction >= 0.0 && common_power_fraction <= 1.0))
        throw PreconditionError("AoConfig: common power fraction must lie in [0, 1]");
    if (init == InitPolicy::kGiven && !initial)
        throw PreconditionError("AoConfig: policy 'given' requires an initial precoder set");
}

std::vector<double> AoTrace::objectives() const {
    std::vector<double> out;
    out.reserve(iterations.size());
    for (const AoIterate& it : iterations) out.push_back(it.objective);
    return out;
}

namespace {

CMatrix sample_covariance(const SampleSet& samples, int user) {
    const int n = samples.n_tx();
    CMatrix c = CMatrix::Zero(n, n);
    for (int s = 0; s < samples.size(); ++s) {
        const auto h = samples[s].col(user);
        c.noalias() += h * h.adjoint();
    }
    return c / static_cast<double>(samples.size());
}

CVector dominant_direction(const CMatrix& cov) {
    return hermitian_evd(HermitianMatrix(cov)).eigenvectors.col(0);
}

CVector random_direction(int n, CounterRng& rng) {
    CVector v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.complex_normal();
    const double norm = v.norm();
    return norm > 0.0 ? CVector(v / norm) : CVector(CVector::Unit(n, 0));
}

}  // namespace

PrecoderSet initialize_precoders(const SampleSet& samples, double power_budget, InitPolicy policy,
                                 double common_fraction, std::uint64_t seed) {
    if (!(power_budget > 0.0)) throw PreconditionError("initialize_precoders: power budget must be positive");
    if (policy == InitPolicy::kGiven)
        throw PreconditionError("initialize_precoders: 'given' policy has no construction");
    const int n = samples.n_tx();
    const int k_users = samples.users();
    PrecoderSet p(n, k_users);
    const double common_power = common_fraction * power_budget;
    const double private_power = (1.0 - common_fraction) * power_budget / k_users;

    if (policy == InitPolicy::kDominantEigenvector) {
        CMatrix total = CMatrix::Zero(n, n);
        for (int k = 0; k < k_users; ++k) {
            const CMatrix cov = sample_covariance(samples, k);
            total += cov;
            p.private_precoder(k) = std::sqrt(private_power) * dominant_direction(cov);
        }
        if (common_power > 0.0) p.common() = std::sqrt(common_power) * dominant_direction(total);
    } else {
        CounterRng rng = CounterRng::stream(seed, {0x494E4954ULL});
        for (int k = 0; k < k_users; ++k) p.private_precoder(k) = std::sqrt(private_power) * random_direction(n, rng);
        if (common_power > 0.0) p.common() = std::sqrt(common_power) * random_direction(n, rng);
    }
    return p;
}

std::vector<int> order_by_channel_energy(const SampleSet& samples) {
    std::vector<double> energy(static_cast<std::size_t>(samples.users()), 0.0);
    for (int s = 0; s < samples.size(); ++s)
        for (int k = 0; k < samples.users(); ++k) energy[static_cast<std::size_t>(k)] += samples[s].col(k).squaredNorm();
    std::vector<int> order(energy.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return energy[static_cast<std::size_t>(a)] > energy[static_cast<std::size_t>(b)];
    });
    return order;
}

std::vector<int> order_by_strength(const ChannelStats& stats) {
    std::vector<double> strength;
    if (const auto* u = std::get_if<UlaPhaseStats>(&stats)) {
        strength = u->amplitudes;
    } else {
        // tr(R_k) = N_t for every unit-diagonal exponential correlation matrix.
        const auto& r = std::get<CorrelatedRayleighStats>(stats);
        strength.assign(r.coefficients.size(), static_cast<double>(r.n_tx));
    }
    std::vector<int> order(strength.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return strength[static_cast<std::size_t>(a)] > strength[static_cast<std::size_t>(b)];
    });
    return order;
}

LinkPlan make_plan(Strategy strategy, const SampleSet& samples, const std::vector<int>& noma_order) {
    switch (strategy) {
        case Strategy::kRsma: return LinkPlan::rsma(samples.users());
        case Strategy::kSdma: return LinkPlan::sdma(samples.users());
        case Strategy::kNoma:
            return LinkPlan::noma(noma_order.empty() ? order_by_channel_energy(samples) : noma_order);
    }
    throw PreconditionError("make_plan: unknown strategy");
}

PrecoderSet rsma_start_from_sdma(const SampleSet& samples, const PrecoderSet& sdma, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw PreconditionError("rsma_start_from_sdma: fraction must lie in (0, 1)");
    const double power = sdma.total_power();
    PrecoderSet p = sdma;
    p.common_rates().setZero();
    p.common().setZero();
    for (int k = 0; k < p.users(); ++k) p.private_precoder(k) *= std::sqrt(1.0 - fraction);
    CMatrix total = CMatrix::Zero(samples.n_tx(), samples.n_tx());
    for (int k = 0; k < samples.users(); ++k) total += sample_covariance(samples, k);
    p.common() = std::sqrt(fraction * power) * dominant_direction(total);
    return p;
}

AoTrace ao_optimize(const SampleSet& samples, double power_budget, const AoConfig& config) {
    config.validate();
    if (!(power_budget > 0.0)) throw PreconditionError("ao_optimize: power budget must be positive");

    AoTrace trace;
    trace.plan = make_plan(config.strategy, samples, config.noma_order);
    const LinkPlan& plan = trace.plan;

    PrecoderSet current;
    if (config.init == InitPolicy::kGiven) {
        current = *config.initial;
        if (current.n_tx() != samples.n_tx() || current.users() != samples.users())
            throw PreconditionError("ao_optimize: initial precoders do not match the sample dimensions");
        current.validate(power_budget);
    } else {
        const double alpha = plan.uses_common_stream() ? config.common_power_fraction : 0.0;
        current = initialize_precoders(samples, power_budget, config.init, alpha, config.init_seed);
    }
    // Streams the plan does not use carry no power.
    const std::vector<int> active = plan.active_streams();
    for (int s = 0; s <= samples.users(); ++s)
        if (!std::binary_search(active.begin(), active.end(), s)) current.streams().col(s).setZero();
    if (!plan.uses_common_stream()) current.common_rates().setZero();

    // Iterates are scored by their true max-min rate with the shares re-split,
    // since the solver's shares only satisfy the surrogate common-rate bound.
    auto score = [&](const PrecoderSet& p, PrecoderSet& resplit) {
        resplit = p;
        RVector shares;
        const double value = mmf_with_optimal_split(samples, plan, p, &shares);
        resplit.common_rates() = shares;
        return value;
    };
    trace.final_mmf.value = score(current, trace.final_precoders);
    trace.initial_mmf = trace.final_mmf.value;

    SubproblemOptions options;
    options.barrier = config.barrier;
    double previous = 0.0;
    for (int n = 1; n <= config.max_iterations; ++n) {
        const EqualizerWeightState state = mmse_update(samples, plan, current);
        const SubproblemCoefficients coeffs = assemble_coefficients(samples, plan, state);
        options.warm_start = current;
        const SubproblemSolution sol = solve_convex_subproblem(coeffs, power_budget, options);

        const bool usable = sol.status == SolverStatus::kOptimal ||
                            (sol.status == SolverStatus::kMaxIterations && sol.max_constraint <= 1e-7);
        if (!usable) {
            trace.status = AoStatus::kSubproblemFailure;
            return trace;
        }

        current = sol.precoders;
        AoIterate it;
        it.iteration = n;
        it.objective = sol.objective;
        it.max_constraint = sol.max_constraint;
        it.power = current.total_power();
        it.solver = sol.status;
        it.common_stream_disabled = sol.common_stream_disabled;
        PrecoderSet resplit;
        it.mmf = score(current, resplit);
        trace.iterations.push_back(it);

        if (it.mmf > trace.final_mmf.value) {
            trace.final_precoders = std::move(resplit);
            trace.final_mmf.value = it.mmf;
        }
        if (n > 1 && sol.objective < previous - config.monotonic_slack) trace.monotonicity_warning = true;
        if (std::abs(sol.objective - previous) < config.tolerance) {
            trace.converged = true;
            trace.status = AoStatus::kConverged;
            return trace;
        }
        previous = sol.objective;
    }
    trace.status = AoStatus::kMaxIterations;
    return trace;
}

AoTrace noma_optimize(const SampleSet& samples, double power_budget, const AoConfig& config) {
    AoConfig c = config;
    c.strategy = Strategy::kNoma;
    return ao_optimize(samples, power_budget, c);
}

void write_trace(std::ostream& os, const AoTrace& trace) {
    char buf[256];
    os << "# strategy " << to_string(trace.plan.strategy) << " status " << to_string(trace.status)
       << " iterations " << trace.iteration_count() << " converged " << (trace.converged ? 1 : 0)
       << " monotonicity_warning " << (trace.monotonicity_warning ? 1 : 0) << '\n';
    std::snprintf(buf, sizeof buf, "# initial_mmf %.12g final_mmf %.12g\n", trace.initial_mmf,
                  trace.final_mmf.value);
    os << buf;
    os << "# iter objective mmf max_constraint power solver\n";
    for (const AoIterate& it : trace.iterations) {
        std::snprintf(buf, sizeof buf, "%d %.12g %.12g %.6e %.12g %s\n", it.iteration, it.objective, it.mmf,
                      it.max_constraint, it.power, to_string(it.solver).c_str());
        os << buf;
    }
}

}  // namespace rsmastat
