#include <random>

#include <benchmark/benchmark.h>

#include <chstab/basis.hpp>
#include <chstab/feedback.hpp>
#include <chstab/loop.hpp>
#include <chstab/spectrum.hpp>

namespace {

using namespace chstab;

struct Fixture {
  ModeSet modes;
  PhysParams params;
  UnstableBasis basis;
  FeedbackLaw law;
  Equilibrium eq = Equilibrium::constant(0.0);

  explicit Fixture(int k)
      : modes(neumann_modes(Domain::interval(4.442882938158366, {Side::right}), k)),
        params(derive_params(1.0, 1.0, 1.0, -1.0)),
        basis(unstable_basis(modes, params)),
        law(synthesize(modes, params, basis, check_assumptions(modes, params, basis))) {}
};

void BM_Synthesize(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const AssumptionReport a = check_assumptions(f.modes, f.params, f.basis);
  for (auto _ : state) benchmark::DoNotOptimize(synthesize(f.modes, f.params, f.basis, a));
}
BENCHMARK(BM_Synthesize)->Arg(32)->Arg(64)->Arg(128);

void BM_ClosedLoopSpectrum(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const ClosedLoopSystem s = assemble_closed_loop(f.modes, f.params, f.law, f.basis);
    benchmark::DoNotOptimize(spectral_report(s.closed));
  }
}
BENCHMARK(BM_ClosedLoopSpectrum)->Arg(32)->Arg(64)->Arg(128);

void BM_ExactPropagator(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const ClosedLoopSystem s = assemble_closed_loop(f.modes, f.params, f.law, f.basis);
  for (auto _ : state) benchmark::DoNotOptimize(exact_propagator(s.closed, 0.01));
}
BENCHMARK(BM_ExactPropagator)->Arg(32)->Arg(64)->Arg(128);

void BM_NonlinearField(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const NonlinearModel model(f.modes, f.params, f.law, f.basis, f.eq);
  std::mt19937_64 rng(1);
  const Vector x = random_mass_matched(f.modes.size(), 1e-2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(model.field(x));
}
BENCHMARK(BM_NonlinearField)->Arg(32)->Arg(64)->Arg(128);

void BM_IntegrateLinear(benchmark::State& state) {
  const Fixture f(32);
  const ClosedLoopSystem s = assemble_closed_loop(f.modes, f.params, f.law, f.basis);
  std::mt19937_64 rng(1);
  const Vector x = random_mass_matched(32, 1.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_linear(s, x, 80.0, 0.01));
}
BENCHMARK(BM_IntegrateLinear)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
