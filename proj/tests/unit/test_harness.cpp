#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"

#include <odefit/dataset_io.hpp>
#include <odefit/errors.hpp>
#include <odefit/harness.hpp>

using namespace odefit;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.particle_counts = {2, 3};
  cfg.grid = {0.0, 0.1, 10};
  cfg.epochs = 5;
  cfg.test_trajectories = 3;
  cfg.seed = 17;
  cfg.rsse_every = 2;
  return cfg;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("odefit_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config json round-trips and rejects unknown keys") {
  ExperimentConfig cfg = small_config();
  cfg.truth = CSParams{0.5, 1.0, 1.2, 1.5, 0.5};
  cfg.algorithms = {Algorithm::alg3, Algorithm::alg1};
  cfg.solver.method = SolverMethod::rk4;
  cfg.noise_std = 1e-3;
  CHECK(config_from_json(to_json(cfg)) == cfg);
  CHECK(config_from_json("{}") == ExperimentConfig{});
  CHECK_THROWS_AS(config_from_json(R"({"epochz": 3})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"epochs": "many"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"epochs": 0})"), ConfigError);
  CHECK_THROWS_AS(config_from_json("not json"), ConfigError);
}

TEST_CASE("samplers respect their boxes") {
  std::mt19937_64 rng(1);
  const ParamRanges ranges;
  for (int i = 0; i < 200; ++i) {
    const CSParams p = sample_params(rng, ranges);
    CHECK(p.gamma >= 0.1);
    CHECK(p.gamma <= 1.5);
    CHECK(p.l_r >= 0.3);
    CHECK(p.l_r <= 1.0);
    const CSParams q = perturb_params(rng, p, 0.2);
    CHECK(std::abs(q.c_a / p.c_a - 1.0) <= 0.2);
  }
  SwarmSampler box;
  box.min_separation = 0.5;
  const Vector s = sample_swarm(rng, 6, box);
  for (Index i = 0; i < 6; ++i) {
    CHECK(std::abs(s(2 * i)) <= 2.0);
    CHECK(std::abs(s(12 + 2 * i)) <= 0.5);
    for (Index j = 0; j < i; ++j) {
      CHECK(std::hypot(s(2 * i) - s(2 * j), s(2 * i + 1) - s(2 * j + 1)) >= 0.5);
    }
  }
}

TEST_CASE("dataset generation is seeded and shares truth across sizes") {
  ExperimentConfig cfg = small_config();
  cfg.noise_std = 0.01;
  const Dataset a = generate_dataset(cfg, 3);
  CHECK(a == generate_dataset(cfg, 3));
  const Dataset b = generate_dataset(cfg, 2);
  CHECK(a.truth == b.truth);
  CHECK(a.init == b.init);
  CHECK(a.targets.rows() == 11);
  CHECK(a.targets.cols() == 12);
  CHECK(a.test_x0s.size() == 3);
  CHECK(a.targets.row(0) == a.x0.transpose());

  cfg.seed = 18;
  CHECK_FALSE(generate_dataset(cfg, 3).truth == a.truth);
}

TEST_CASE("dataset text format round-trips exactly") {
  ExperimentConfig cfg = small_config();
  cfg.noise_std = 0.05;
  const Dataset d = generate_dataset(cfg, 2);
  std::stringstream ss;
  write_dataset(ss, d);
  CHECK(read_dataset(ss) == d);

  std::stringstream broken("{\"format\":\"something-else\"}\n");
  CHECK_THROWS_AS(read_dataset(broken), Error);
}

TEST_CASE("test evaluation") {
  const ExperimentConfig cfg = small_config();
  const Dataset d = generate_dataset(cfg, 2);
  const CuckerSmale field(2);
  const IdentityObservation obs(8);
  const Vector truth = d.truth.to_vector();
  const TestEvaluation at_truth =
      evaluate_test(field, truth, d.test_x0s, truth, d.grid, cfg.solver, obs);
  CHECK(at_truth.mean_rsse == 0.0);
  CHECK(at_truth.evaluated == 3);
  const TestEvaluation off =
      evaluate_test(field, d.init.to_vector(), d.test_x0s, truth, d.grid, cfg.solver, obs);
  CHECK(off.mean_rsse > 0.0);
  CHECK_THROWS_AS(evaluate_test(field, truth, {}, truth, d.grid, cfg.solver, obs), MetricError);
}

TEST_CASE("csv sink writes the documented header") {
  std::ostringstream out;
  CsvRecordSink sink(out);
  EpochRow row;
  row.epoch = 3;
  row.sse = 0.5;
  sink.on_epoch(row);
  const std::string text = out.str();
  CHECK(text.rfind("epoch,sse,rsse_ode,grad_theta_norm,grad_x_norm,residual_norm,epoch_seconds\n",
                   0) == 0);
  CHECK(text.find("3,0.5,nan,0,nan,nan,0\n") != std::string::npos);
}

TEST_CASE("benchmark sweep writes every artifact") {
  ExperimentConfig cfg = small_config();
  cfg.algorithms = {Algorithm::alg0_direct, Algorithm::alg1, Algorithm::alg2, Algorithm::alg3};
  const fs::path dir = scratch("bench");
  cfg.out_dir = dir.string();
  cfg.threads = 2;
  const RunSummary summary = run_benchmark(cfg);
  CHECK(summary.entries.size() == 8);
  CHECK_FALSE(summary.any_failure());
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "N3" / "alg3.csv"));
  CHECK(fs::exists(dir / "N2" / "dataset.txt"));
  CHECK(fs::exists(dir / "plots" / "rsse_N2.svg"));
  CHECK(load_config(dir / "config.json") == cfg);

  const std::string json = summary_to_json(summary);
  CHECK(json.find("\"alg0_direct\"") != std::string::npos);
  CHECK(json.find("\"any_failure\": false") != std::string::npos);
  fs::remove_all(dir);
}
