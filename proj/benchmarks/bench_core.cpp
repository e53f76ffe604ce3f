#include <benchmark/benchmark.h>

#include <array>
#include <vector>

#include "nlfk/pathsim.hpp"
#include "nlfk/rng.hpp"
#include "nlfk/sampler.hpp"
#include "nlfk/weakform.hpp"

using namespace nlfk;

static void BM_PhiloxBlock(benchmark::State& state) {
  std::array<std::uint32_t, 4> ctr{0, 0, 7, 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(philox4x32(ctr, {42, 0}));
    ++ctr[0];
  }
}
BENCHMARK(BM_PhiloxBlock);

static void BM_Uniform(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.uniform());
}
BENCHMARK(BM_Uniform);

static void BM_Normal(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_Normal);

// Arg: 10 * alpha.
static void BM_Subordinator(benchmark::State& state) {
  RngStream rng(1, 0);
  const double alpha = state.range(0) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(subordinator_increment(rng, 1e-3, alpha));
}
BENCHMARK(BM_Subordinator)->Arg(5)->Arg(10)->Arg(15);

static void BM_StableIncrement2D(benchmark::State& state) {
  RngStream rng(1, 0);
  std::vector<double> out(2, 0.0);
  for (auto _ : state) {
    add_stable_increment(rng, 1e-3, 1.5, 1.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_StableIncrement2D);

static void BM_ExprEval(benchmark::State& state) {
  const Expr e = parse_expression("exp(-norm(x)^2) * indicator(x1 > 0) + 0.5 * x2", 2);
  const std::vector<double> x{0.3, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(e(x));
}
BENCHMARK(BM_ExprEval);

// Full exit paths of the mixed process on the unit disk; reports steps/s.
static void BM_ExitPath(benchmark::State& state) {
  ProblemSpec s(Domain::ball({0.0, 0.0}, 1.0));
  s.a = state.range(0) ? 1.0 : 0.0;
  s.f = constant_field(1.0, 2);
  PathConfig cfg;
  cfg.dt = 1e-3;
  PathSimulator sim(s, cfg);
  const std::vector<double> x0{0.0, 0.0};
  std::uint64_t stream = 0;
  long steps = 0;
  for (auto _ : state) {
    RngStream rng(3, stream++);
    steps += sim.simulate(x0, rng).steps;
  }
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ExitPath)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_WeakFormAssembly(benchmark::State& state) {
  ProblemSpec s(Domain::ball({0.0, 0.0}, 1.0));
  const TestFunction phi(s.domain, Point{0.0, 0.0}, 1.0 / 3.0);
  QuadraturePolicy q;
  q.h = 0.05;
  q.delta = 0.1;
  for (auto _ : state) {
    const WeakFormFunctional wf(s, phi, q);
    benchmark::DoNotOptimize(wf.nodes().size());
  }
}
BENCHMARK(BM_WeakFormAssembly)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
