#include <benchmark/benchmark.h>

#include "weyl/assembly.hpp"
#include "weyl/grid.hpp"
#include "weyl/phasespace.hpp"
#include "weyl/spectra.hpp"

namespace {

weyl::ModelSpec harmonic(int dim) {
  if (dim == 1) return {weyl::Geometry::line(), weyl::Potential::harmonic({1.0})};
  return {weyl::Geometry::plane(), weyl::Potential::harmonic({1.0, 1.0})};
}

void BM_Assemble2D(benchmark::State& state) {
  const double hbar = 1.0 / static_cast<double>(state.range(0));
  const auto model = harmonic(2);
  const auto grid = weyl::make_grid(model, hbar, 1.0, weyl::GridPolicy{});
  for (auto _ : state) {
    auto op = weyl::assemble(model, grid, hbar);
    benchmark::DoNotOptimize(op.matrix().nonZeros());
  }
  state.counters["unknowns"] = static_cast<double>(grid.size());
}
BENCHMARK(BM_Assemble2D)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_CountSturm1D(benchmark::State& state) {
  const double hbar = 1.0 / static_cast<double>(state.range(0));
  const auto model = harmonic(1);
  const auto op = weyl::assemble(model, weyl::make_grid(model, hbar, 1.0, weyl::GridPolicy{}), hbar);
  for (auto _ : state) benchmark::DoNotOptimize(weyl::count_below(op, 1.0).count);
  state.counters["unknowns"] = static_cast<double>(op.order());
}
BENCHMARK(BM_CountSturm1D)->Arg(10)->Arg(50)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_CountLdlt2D(benchmark::State& state) {
  const double hbar = 1.0 / static_cast<double>(state.range(0));
  const auto model = harmonic(2);
  const auto op = weyl::assemble(model, weyl::make_grid(model, hbar, 1.0, weyl::GridPolicy{}), hbar);
  for (auto _ : state) benchmark::DoNotOptimize(weyl::count_below(op, 1.0).count);
  state.counters["unknowns"] = static_cast<double>(op.order());
}
BENCHMARK(BM_CountLdlt2D)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_DenseOracle(benchmark::State& state) {
  const double hbar = 1.0 / static_cast<double>(state.range(0));
  const auto model = harmonic(1);
  const auto op = weyl::assemble(model, weyl::make_grid(model, hbar, 1.0, weyl::GridPolicy{}), hbar);
  for (auto _ : state) benchmark::DoNotOptimize(weyl::dense_count_oracle(op, 1.0).count);
  state.counters["unknowns"] = static_cast<double>(op.order());
}
BENCHMARK(BM_DenseOracle)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_VolumeReduced2D(benchmark::State& state) {
  const auto model = harmonic(2);
  for (auto _ : state) benchmark::DoNotOptimize(weyl::volume_reduced(model, 1.0).value);
}
BENCHMARK(BM_VolumeReduced2D)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
