#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlagg/simulation.hpp"

using namespace nlagg;

namespace {

ScalarField random_field(const Domain& d) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  ScalarField f(d);
  for (auto& v : f.values()) v = u(rng);
  return f;
}

SimConfig bench_config(int n) {
  SimConfig cfg;
  cfg.domain = Domain::make(n, n);
  cfg.kernel = {KernelKind::Gaussian, 0.08, 1.5};
  cfg.lambda = 1e-6;
  cfg.initial.width = 0.1;
  return cfg;
}

}  // namespace

static void BM_Convolve(benchmark::State& state) {
  const Domain d = Domain::make(state.range(0), state.range(0));
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.08, 1.5}, d);
  const ScalarField f = random_field(d);
  for (auto _ : state) benchmark::DoNotOptimize(convolve(k, f));
}
BENCHMARK(BM_Convolve)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

static void BM_ConvolveGrad(benchmark::State& state) {
  const Domain d = Domain::make(state.range(0), state.range(0));
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.08, 1.5}, d);
  const ScalarField f = random_field(d);
  for (auto _ : state) benchmark::DoNotOptimize(convolve_grad(k, f));
}
BENCHMARK(BM_ConvolveGrad)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

static void BM_SolveStokes(benchmark::State& state) {
  const Domain d = Domain::make(state.range(0), state.range(0));
  VectorField f = grad(random_field(d));
  for (std::size_t k = 0; k < f.xs().size(); ++k) f.xs()[k] += std::sin(0.01 * k);
  f.enforce_no_slip();
  for (auto _ : state) benchmark::DoNotOptimize(solve_stokes(f));
}
BENCHMARK(BM_SolveStokes)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_ChStep(benchmark::State& state) {
  const Simulator sim(bench_config(static_cast<int>(state.range(0))));
  const SimState s = sim.initial_state();
  ChStepStats stats;
  for (auto _ : state) benchmark::DoNotOptimize(ch_step(s.ch, s.ns.u, sim.ch_params(), sim.kernel(), sim.config().potential, &stats));
  state.counters["newton"] = stats.newton_iterations;
  state.counters["cg"] = stats.cg_iterations;
}
BENCHMARK(BM_ChStep)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_NsStep(benchmark::State& state) {
  SimConfig cfg = bench_config(static_cast<int>(state.range(0)));
  cfg.fluid = {2.0, 1.0, 0.1, 0.05};
  const Simulator sim(cfg);
  const SimState s0 = sim.initial_state();
  const SimState s1 = sim.step(s0);
  for (auto _ : state) benchmark::DoNotOptimize(ns_step(s1.ns, s0.ch.phi, s1.ch.phi, s1.ch.mu, cfg.fluid, cfg.dt));
}
BENCHMARK(BM_NsStep)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_CoupledStep(benchmark::State& state) {
  const Simulator sim(bench_config(64));
  SimState s = sim.step(sim.initial_state());
  for (auto _ : state) benchmark::DoNotOptimize(sim.step(s));
}
BENCHMARK(BM_CoupledStep)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
