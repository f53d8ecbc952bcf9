#include <benchmark/benchmark.h>

#include "rsmastat/optimizer.hpp"

using namespace rsmastat;

namespace {

SampleSet rayleigh(int n_tx, int users, int samples, double magnitude) {
    CorrelatedRayleighStats st;
    st.n_tx = n_tx;
    for (int k = 0; k < users; ++k) st.coefficients.push_back(std::polar(magnitude, 0.7 * k));
    return sample_correlated_rayleigh(st, samples, 17);
}

void BM_HermitianEvd(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const HermitianMatrix r = build_correlation_matrix(std::polar(0.8, 0.3), n);
    for (auto _ : state) benchmark::DoNotOptimize(hermitian_evd(r));
}
BENCHMARK(BM_HermitianEvd)->Arg(4)->Arg(8)->Arg(16);

void BM_AssembleCoefficients(benchmark::State& state) {
    const SampleSet set = rayleigh(4, 3, static_cast<int>(state.range(0)), 0.6);
    const LinkPlan plan = LinkPlan::rsma(3);
    const PrecoderSet p = initialize_precoders(set, 100.0, InitPolicy::kDominantEigenvector, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(assemble_coefficients(set, plan, mmse_update(set, plan, p)));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AssembleCoefficients)->Arg(100)->Arg(1000);

void BM_SolveSubproblem(benchmark::State& state) {
    const int users = static_cast<int>(state.range(0));
    const SampleSet set = rayleigh(4, users, 200, 0.6);
    const LinkPlan plan = LinkPlan::rsma(users);
    const PrecoderSet p = initialize_precoders(set, 100.0, InitPolicy::kDominantEigenvector, 0.5);
    const SubproblemCoefficients c = assemble_coefficients(set, plan, mmse_update(set, plan, p));
    for (auto _ : state) benchmark::DoNotOptimize(solve_convex_subproblem(c, 100.0));
}
BENCHMARK(BM_SolveSubproblem)->Arg(2)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_AoRun(benchmark::State& state) {
    const SampleSet set = rayleigh(4, 3, 100, 0.6);
    AoConfig cfg;
    cfg.strategy = static_cast<Strategy>(state.range(0));
    int iterations = 0;
    for (auto _ : state) iterations = ao_optimize(set, 100.0, cfg).iteration_count();
    state.counters["ao_iterations"] = iterations;
    state.SetLabel(to_string(cfg.strategy));
}
BENCHMARK(BM_AoRun)
    ->Arg(static_cast<int>(Strategy::kRsma))
    ->Arg(static_cast<int>(Strategy::kSdma))
    ->Arg(static_cast<int>(Strategy::kNoma))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
