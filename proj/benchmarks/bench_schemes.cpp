#include <benchmark/benchmark.h>

#include <array>

#include "jumpmlmc/coupling.hpp"
#include "jumpmlmc/mlmc.hpp"

using namespace jumpmlmc;

namespace {

const Problem& gl() {
  static const Problem p = preset(kGinzburgLandauJump);
  return p;
}

void BM_Step(benchmark::State& state) {
  const auto kind = static_cast<SchemeKind>(state.range(0));
  StepWorkspace ws(gl());
  std::array<double, 1> y{0.8}, out{};
  const std::array<double, 1> dw{0.05};
  const SchemeConfig cfg;
  for (auto _ : state) {
    step_into(gl(), kind, y, 1.0 / 64, dw, 0, cfg, ws, out);
    benchmark::DoNotOptimize(out);
  }
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_Step)->DenseRange(0, 3);

void BM_ImplicitSolve(benchmark::State& state) {
  StepWorkspace ws(gl());
  std::array<double, 1> y{};
  double x = -5.0;
  for (auto _ : state) {
    implicit_drift_solve_into(gl(), std::array{x}, 0.25, {}, ws, y);
    benchmark::DoNotOptimize(y);
    x = x > 5.0 ? -5.0 : x + 0.37;
  }
}
BENCHMARK(BM_ImplicitSolve);

void BM_Generate(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate(1, {level, i++}, gl()));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << level));
}
BENCHMARK(BM_Generate)->Arg(4)->Arg(8)->Arg(12);

void BM_CoupledSample(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_coupled(gl(), SchemeKind::SSBE, level, 1, i++));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sample_cost(level, true)));
}
BENCHMARK(BM_CoupledSample)->DenseRange(3, 9, 2);

void BM_SampleLevel(benchmark::State& state) {
  const Payoff f = payoff_from_id("mean_sq");
  RunOptions opts;
  opts.seed = 1;
  opts.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_level(gl(), SchemeKind::SSBE, f, 6, true, 0, 2000, opts));
}
BENCHMARK(BM_SampleLevel)->Arg(1)->Arg(4)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
