#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "popowicz/dynamics.hpp"
#include "popowicz/littlewood_paley.hpp"

using namespace popowicz;

namespace {

Field bump(const Grid& g, double a, double c) {
  return Field::sample(g, [=](double x) { return a * std::exp(-(x - c) * (x - c) / 4.0); });
}

State smooth(std::size_t n) {
  const Grid g(n, 40.0);
  return State{bump(g, 0.2, 15.0), bump(g, 0.1, 25.0), 0.0};
}

void BM_Derivative(benchmark::State& st) {
  const State s = smooth(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(derivative(s.u));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_Derivative)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_Tendency(benchmark::State& st) {
  const State s = smooth(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(tendency(s));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_Tendency)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_StepRK4(benchmark::State& st) {
  const State s = smooth(static_cast<std::size_t>(st.range(0)));
  const double dt = stable_time_step(s);
  for (auto _ : st) benchmark::DoNotOptimize(step_rk4(s, dt));
}
BENCHMARK(BM_StepRK4)->Arg(512)->Arg(1024)->Arg(4096);

void BM_Decompose(benchmark::State& st) {
  const State s = smooth(static_cast<std::size_t>(st.range(0)));
  const DyadicCutoffs cutoffs(s.grid());
  for (auto _ : st) benchmark::DoNotOptimize(decompose(s.u, cutoffs));
}
BENCHMARK(BM_Decompose)->Arg(256)->Arg(1024)->Arg(4096);

void BM_BesovNorm(benchmark::State& st) {
  const State s = smooth(static_cast<std::size_t>(st.range(0)));
  const DyadicCutoffs cutoffs(s.grid());
  const BesovParams p{2.6, 2.0, 2.0};
  for (auto _ : st) benchmark::DoNotOptimize(besov_norm(s.u, p, cutoffs));
}
BENCHMARK(BM_BesovNorm)->Arg(256)->Arg(1024)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
