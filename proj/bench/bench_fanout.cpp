// Serial reference vs OpenMP fan-out over independent trials.

#include <benchmark/benchmark.h>

#include "skan/experiments.hpp"

using namespace skan;

namespace {

Parallelism mode(const benchmark::State& state) {
  return state.range(0) ? Parallelism{false, static_cast<int>(state.range(0))} : Parallelism::serial_only();
}

void BM_NormError(benchmark::State& state) {
  NormErrorConfig cfg;
  cfg.bit_widths = {4, 8, 16};
  cfg.seeds = 8;
  cfg.updates = 2000;
  const auto par = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_norm_error(cfg, par));
}

void BM_Recognition(benchmark::State& state) {
  auto cfg = fig9_preset("aggressive");
  cfg.noisy_counts = {8};
  cfg.snr_grid = {0.0, 1.0};
  cfg.seeds = 2;
  cfg.presentations = 200;
  cfg.learning = 50;
  const auto par = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_recognition(cfg, par));
}

void BM_Sweep(benchmark::State& state) {
  auto cfg = fig7_preset(NormSignal::MaxW, {0.0, 0.5, 1.0});
  cfg.seeds = 2;
  cfg.presentations = 400;
  cfg.burn_in = 200;
  const auto par = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_noise_sweep(cfg, par));
}

}  // namespace

// Argument: 0 = serial reference, otherwise the thread count.
BENCHMARK(BM_NormError)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Recognition)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
