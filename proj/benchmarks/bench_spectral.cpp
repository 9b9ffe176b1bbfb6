#include <benchmark/benchmark.h>

#include "pairtomo/io.hpp"
#include "pairtomo/spectral.hpp"

using namespace pairtomo;

namespace {

CrystalConfig calibrated() {
    CrystalConfig c = io::read_crystal_config(io::default_crystal_file());
    calibrate_cut_angle(c);
    return c;
}

}  // namespace

static void BM_JsiGrid(benchmark::State& state) {
    const auto config = calibrated();
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto grid = SpectralGrid::uniform(790e-9, 830e-9, n, 1480e-9, 1620e-9, n);
    for (auto _ : state) {
        auto j = jsi(config, grid);
        benchmark::DoNotOptimize(j);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_JsiGrid)->RangeMultiplier(2)->Range(64, 512)->Complexity()->Unit(benchmark::kMillisecond);

static void BM_Calibration(benchmark::State& state) {
    for (auto _ : state) {
        auto config = io::read_crystal_config(io::default_crystal_file());
        benchmark::DoNotOptimize(calibrate_cut_angle(config));
    }
}
BENCHMARK(BM_Calibration)->Unit(benchmark::kMicrosecond);

static void BM_DfgSpectrum(benchmark::State& state) {
    const auto config = calibrated();
    const auto grid = SpectralGrid::uniform(790e-9, 830e-9, 2, 1480e-9, 1620e-9, 4096);
    for (auto _ : state) {
        auto s = dfg_spectrum(config, config.design_signal, grid.idler_axis);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_DfgSpectrum)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
