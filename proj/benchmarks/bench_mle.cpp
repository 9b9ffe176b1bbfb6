#include <benchmark/benchmark.h>

#include "pairtomo/measurement.hpp"
#include "pairtomo/mle.hpp"
#include "pairtomo/qstate.hpp"

using namespace pairtomo;

static void BM_MleFitNoiseless(benchmark::State& state) {
    const auto records = simulate_set(bell_state(0.0247), build_plan(), SetNoiseModel{});
    for (auto _ : state) {
        auto result = mle_fit(records);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_MleFitNoiseless)->Unit(benchmark::kMillisecond);

static void BM_MleFitNoisy(benchmark::State& state) {
    SetNoiseModel noise;
    noise.detector_noise_rel = 0.01;
    noise.seed_power_jitter_rel = 0.005;
    noise.rng_seed = 3;
    const auto records = simulate_set(bell_state(0.0247), build_plan(), noise);
    for (auto _ : state) {
        auto result = mle_fit(records);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_MleFitNoisy)->Unit(benchmark::kMillisecond);

static void BM_MleFitPoissonCounts(benchmark::State& state) {
    QstNoiseModel noise;
    noise.pair_rate = 1.0e4;
    noise.rng_seed = 5;
    const auto records = simulate_qst(bell_state(0.0138), build_plan(), noise);
    for (auto _ : state) {
        auto result = mle_fit(records);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_MleFitPoissonCounts)->Unit(benchmark::kMillisecond);

static void BM_LinearInversion(benchmark::State& state) {
    const auto data =
        normalize_records(simulate_set(bell_state(0.0), build_plan(), SetNoiseModel{}));
    for (auto _ : state) {
        auto lin = linear_inversion(data);
        benchmark::DoNotOptimize(lin);
    }
}
BENCHMARK(BM_LinearInversion)->Unit(benchmark::kMicrosecond);

static void BM_Bootstrap100(benchmark::State& state) {
    SetNoiseModel noise;
    noise.detector_noise_rel = 0.01;
    noise.rng_seed = 9;
    const auto records = simulate_set(bell_state(0.0), build_plan(), noise);
    BootstrapOptions opts;
    opts.n_resamples = 100;
    opts.power_noise_rel = 0.01;
    opts.fidelity_target = bell_state(0.0);
    for (auto _ : state) {
        auto stats = bootstrap(records, {"fidelity", "concurrence"}, opts);
        benchmark::DoNotOptimize(stats);
    }
}
BENCHMARK(BM_Bootstrap100)->Unit(benchmark::kMillisecond);
