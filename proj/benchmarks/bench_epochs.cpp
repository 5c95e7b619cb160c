#include <benchmark/benchmark.h>

#include <odefit/algorithms.hpp>
#include <odefit/harness.hpp>

using namespace odefit;

namespace {

// One training epoch per iteration. The initial solve of alg1/alg3 is
// amortized over `kEpochs` epochs and the reported counter is the mean
// timed epoch body.
constexpr int kEpochs = 10;

void BM_Epoch(benchmark::State& state) {
  const auto alg = static_cast<Algorithm>(state.range(0));
  const Index n = state.range(1);
  ExperimentConfig cfg;
  cfg.test_trajectories = 1;
  const Dataset data = generate_dataset(cfg, n);
  const CuckerSmale field(n);
  const IdentityObservation obs(4 * n);
  const Problem p{field, obs, data.targets, data.x0, data.grid, cfg.solver};
  TrainConfig tc = TrainConfig::defaults_for(alg);
  tc.epochs = kEpochs;

  double epoch_total = 0.0;
  long epochs = 0;
  for (auto _ : state) {
    const TrainResult r = train(p, {data.init.to_vector()}, tc);
    for (const EpochRow& row : r.record.rows) epoch_total += row.epoch_seconds;
    epochs += static_cast<long>(r.record.rows.size());
  }
  state.counters["epoch_s"] = epoch_total / static_cast<double>(epochs);
  state.SetLabel(std::string(to_string(alg)));
}

void epoch_args(benchmark::internal::Benchmark* b) {
  for (int alg = 0; alg < 4; ++alg) {
    for (int n : {5, 20, 50}) b->Args({alg, n});
  }
}
BENCHMARK(BM_Epoch)->Apply(epoch_args)->Unit(benchmark::kMillisecond);

}  // namespace
