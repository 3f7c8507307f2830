#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ptctk/bell.hpp"
#include "ptctk/controller.hpp"
#include "ptctk/sim.hpp"
#include "ptctk/transform.hpp"

using namespace ptctk;

namespace {

std::vector<double> jet_values(int order) {
  std::vector<double> d(order);
  for (int k = 0; k < order; ++k) d[k] = 1.0 + 0.1 * k;
  return d;
}

SystemSpec benchmark_plant() {
  Disturbance f = [](const Vector& x, double u, double t) {
    return 0.1 - t * t * t * std::exp(-t) * std::sin(x(0) / (u + 0.001)) - 0.5 * u;
  };
  return SystemSpec{1, f, [](const Vector&, double) { return 1.0; }, 0.0};
}

void BM_PartialBell(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto x = jet_values(n);
  for (auto _ : state) {
    double acc = 0.0;
    for (int m = 1; m <= n; ++m) acc += partial_bell(n, m, x);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_PartialBell)->DenseRange(2, 12, 2);

void BM_BellTransform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DerivativeJet jet(jet_values(n + 1));
  for (auto _ : state) benchmark::DoNotOptimize(bell_transform(n, jet, 0.0));
}
BENCHMARK(BM_BellTransform)->DenseRange(1, 9, 2);

void BM_ControllerEvaluate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto map = mu_exp({{{std::numbers::e, 1.0}, {2.0, 3.0}}, 2.0}, n + 1);
  SystemSpec sys{n, [](const Vector&, double, double) { return 0.0; },
                 [](const Vector&, double) { return 1.0; }, 0.0};
  const auto pi = synthesize_ptc(sys, linear_pd(std::vector<double>(n, 2.0)), map);
  const Vector x = Vector::Constant(n, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(pi(x, 1.2));
}
BENCHMARK(BM_ControllerEvaluate)->DenseRange(1, 5, 2);

void BM_PrescribedRun(benchmark::State& state) {
  const auto sys = benchmark_plant();
  const auto map = kappa_log({{{1.0, std::numbers::e}}, 2.0}, 2);
  const auto pi = synthesize_ptc(sys, example4_pi0(20.0, 1.1, 1.0), map);
  const Vector x0 = Vector::Ones(1);
  for (auto _ : state) benchmark::DoNotOptimize(run_prescribed(sys, pi, x0, SimOptions{}));
}
BENCHMARK(BM_PrescribedRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
