#include <benchmark/benchmark.h>

#include <cmath>

#include "dforge/coefficients.hpp"
#include "dforge/solver.hpp"

using namespace dforge;

namespace {

constexpr double kPi = 3.14159265358979323846;

StateFunction bump(int n) {
  const SpectralGrid g(16 * kPi, n);
  return StateFunction::sample(g, [](double x) { return 2.0 + 0.5 * std::exp(-(x - 8 * kPi) * (x - 8 * kPi) / 4); });
}

void BM_Derivative(benchmark::State& state) {
  const auto u = bump(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(derivative(u, 3));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Derivative)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_EvaluateRhs(benchmark::State& state) {
  const auto u = bump(static_cast<int>(state.range(0)));
  const auto& spec = PresetCatalogue::builtin().get("k22").spec;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_rhs(spec, u));
}
BENCHMARK(BM_EvaluateRhs)->RangeMultiplier(4)->Range(256, 4096);

void BM_Step(benchmark::State& state) {
  const auto u = bump(static_cast<int>(state.range(0)));
  const auto& spec = PresetCatalogue::builtin().get("kdv").spec;
  for (auto _ : state) benchmark::DoNotOptimize(step(spec, u, 1e-3, 1e-6));
}
BENCHMARK(BM_Step)->RangeMultiplier(4)->Range(256, 4096);

void BM_LinearizedCoefficients(benchmark::State& state) {
  const auto u = bump(512);
  const auto& spec = PresetCatalogue::builtin().get("k22").spec;
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(linearized_coefficients(spec, u, n));
}
BENCHMARK(BM_LinearizedCoefficients)->Arg(3)->Arg(7)->Arg(11);

}  // namespace

BENCHMARK_MAIN();
