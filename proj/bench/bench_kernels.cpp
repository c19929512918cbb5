#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "cpsdiag/diagnosis.hpp"
#include "cpsdiag/residual_model.hpp"
#include "cpsdiag/simulator.hpp"

using namespace cpsdiag;

namespace {

struct ScoringFixture {
    CausalGraph g;
    std::vector<char> targets;
    std::vector<char> anomalous;
    std::vector<CausalGraph::Index> candidates;

    explicit ScoringFixture(std::size_t n) : g(sample_graph(n, 5.0 / static_cast<double>(n - 1), true, 7)) {
        std::mt19937_64 rng(8);
        targets.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) targets[i] = rng() % 5 == 0;
        anomalous = targets;
        for (std::size_t i = 0; i < n; ++i) candidates.push_back(i);
    }
};

template <bool Parallel>
void BM_ScoreCandidates(benchmark::State& state) {
    const ScoringFixture fx(static_cast<std::size_t>(state.range(0)));
    const ScoringContext ctx(fx.g, fx.targets, fx.anomalous, CriterionWeights::equal());
    for (auto _ : state) {
        auto s = Parallel ? score_candidates_parallel(ctx, fx.candidates) : score_candidates_serial(ctx, fx.candidates);
        benchmark::DoNotOptimize(s.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(fx.candidates.size()));
}

TimeSeriesFrame telemetry(std::size_t rows, const LtiSystem& sys) {
    SimulationOptions o;
    o.horizon = rows;
    o.dt = 0.02;
    o.burn_in = 200;
    return simulate(sys, o, 3);
}

template <bool Parallel>
void BM_ResidualSeries(benchmark::State& state) {
    const auto g = sample_graph(static_cast<std::size_t>(state.range(0)), 0.2, false, 4);
    SystemConfig sc;
    sc.noise_std = 0.01;
    const auto sys = build_system(g, sc, 5);
    const auto model = fit_linear_subspace_model(telemetry(3000, sys), sys.signals_map(), 32, 12);
    const auto test = telemetry(2000, sys);
    for (auto _ : state) {
        auto r = Parallel ? residual_series_parallel(model, test, 1) : residual_series_serial(model, test, 1);
        benchmark::DoNotOptimize(r.timestamps.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(test.rows() - 31));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_ScoreCandidates, false)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_ScoreCandidates, true)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_ResidualSeries, false)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_ResidualSeries, true)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
