#include <map>
#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include <odefit/collocation.hpp>
#include <odefit/cucker_smale.hpp>
#include <odefit/harness.hpp>
#include <odefit/sensitivity.hpp>

using namespace odefit;

namespace {

struct Fixture {
  Index n;
  CuckerSmale field;
  IdentityObservation obs;
  Dataset data;
  Vector theta;
  StateMatrix states;

  explicit Fixture(Index particles)
      : n(particles), field(particles), obs(4 * particles), data(make(particles)) {
    theta = data.init.to_vector();
    states = solve(field, theta, data.x0, data.grid).states;
  }

  static Dataset make(Index particles) {
    ExperimentConfig cfg;
    cfg.test_trajectories = 1;
    return generate_dataset(cfg, particles);
  }
};

const Fixture& fixture(Index n) {
  static std::map<Index, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fixture>(n);
  return *slot;
}

void BM_CsRhs(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  Vector out(4 * f.n);
  for (auto _ : state) {
    f.field.eval(f.data.x0, f.theta, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_CsRhs)->Arg(5)->Arg(20)->Arg(50);

void BM_CsLinearizeVjp(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const Vector w = Vector::Ones(4 * f.n);
  Vector wx, wt;
  for (auto _ : state) {
    const auto lin = f.field.linearize(f.data.x0, f.theta);
    lin->vjp(w, &wx, &wt);
    benchmark::DoNotOptimize(wt.data());
  }
}
BENCHMARK(BM_CsLinearizeVjp)->Arg(5)->Arg(20)->Arg(50);

void BM_CsSensitivityRhs(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const Matrix s = Matrix::Ones(4 * f.n, 5);
  Vector dx(4 * f.n);
  Matrix ds(4 * f.n, 5);
  for (auto _ : state) {
    f.field.sensitivity_rhs(f.data.x0, f.theta, s, dx, ds);
    benchmark::DoNotOptimize(ds.data());
  }
}
BENCHMARK(BM_CsSensitivityRhs)->Arg(5)->Arg(20)->Arg(50);

void BM_Solve(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(f.field, f.theta, f.data.x0, f.data.grid).states.data());
  }
}
BENCHMARK(BM_Solve)->Arg(5)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SolveWithSensitivity(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) {
    const auto st = solve_with_sensitivity(f.field, f.theta, f.data.x0, f.data.grid);
    benchmark::DoNotOptimize(st.trajectory.states.data());
  }
}
BENCHMARK(BM_SolveWithSensitivity)->Arg(5)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_CollocationResidual(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const HermiteSimpson hs(f.field, f.obs, f.data.grid);
  for (auto _ : state) benchmark::DoNotOptimize(hs.residual(f.states, f.theta).data());
}
BENCHMARK(BM_CollocationResidual)->Arg(5)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_CollocationGradX(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const HermiteSimpson hs(f.field, f.obs, f.data.grid);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hs.grad_x(f.states, f.theta, f.data.targets).data());
  }
}
BENCHMARK(BM_CollocationGradX)->Arg(5)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_CollocationGradTheta(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const HermiteSimpson hs(f.field, f.obs, f.data.grid);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hs.grad_theta(f.states, f.theta, f.data.targets).data());
  }
}
BENCHMARK(BM_CollocationGradTheta)->Arg(5)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_CollocationAuglag(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const HermiteSimpson hs(f.field, f.obs, f.data.grid);
  const MultiplierState mult{StateMatrix::Zero(f.data.grid.num_intervals, 4 * f.n), 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hs.auglag(f.states, f.theta, mult, f.data.targets).value);
  }
}
BENCHMARK(BM_CollocationAuglag)->Arg(5)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
