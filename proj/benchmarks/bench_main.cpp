#include "cams/inference.hpp"
#include "cams/verify.hpp"

#include <benchmark/benchmark.h>

namespace {

cams::MetaDataset dataset(int studies) {
    cams::SimScenario sc;
    sc.n_studies = studies;
    sc.seed = 11;
    return cams::simulate(sc);
}

void BM_FitBim(benchmark::State& state) {
    const auto data = dataset(static_cast<int>(state.range(0)));
    const cams::PriorSpec priors;
    const auto grid = cams::GridSpec::defaults(priors);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cams::fit_bim(data, priors, grid));
    }
}
BENCHMARK(BM_FitBim)->Arg(7)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_FitCams(benchmark::State& state) {
    const auto data = dataset(static_cast<int>(state.range(0)));
    const cams::PriorSpec priors;
    const auto grid = cams::GridSpec::defaults(priors);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cams::fit_cams(data, priors, grid));
    }
}
BENCHMARK(BM_FitCams)->Arg(7)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_MixtureQuantile(benchmark::State& state) {
    const auto data = dataset(7);
    const cams::PriorSpec priors;
    const auto fit = cams::fit_cams(data, priors, cams::GridSpec::defaults(priors));
    const auto mix = fit.location("gamma");
    for (auto _ : state) {
        benchmark::DoNotOptimize(mix.quantile(0.975));
    }
}
BENCHMARK(BM_MixtureQuantile)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
