#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <odefit/errors.hpp>
#include <odefit/harness.hpp>
#include <odefit/number_format.hpp>

#include "self_check.hpp"

namespace fs = std::filesystem;
using namespace odefit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRunFailure = 2;

/// Flags shared by the subcommands that build an ExperimentConfig.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> algorithms;
  std::vector<Index> particles;
  std::optional<int> epochs;
  std::optional<int> threads;

  void attach(CLI::App* app, bool with_algorithms, bool with_threads) {
    app->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Experiment seed");
    app->add_option("--out-dir", out_dir, "Output directory");
    app->add_option("--particles", particles, "Particle counts")->delimiter(',');
    app->add_option("--epochs", epochs, "Training epochs");
    if (with_algorithms) {
      app->add_option("--algorithms", algorithms, "alg0, alg1, alg2, alg3")->delimiter(',');
    }
    if (with_threads) app->add_option("--threads", threads, "Worker pool width");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.out_dir = *out_dir;
    if (!particles.empty()) cfg.particle_counts = particles;
    if (epochs) cfg.epochs = *epochs;
    if (threads) cfg.threads = *threads;
    if (!algorithms.empty()) {
      cfg.algorithms.clear();
      for (const auto& a : algorithms) cfg.algorithms.push_back(parse_algorithm(a));
    }
    cfg.validate();
    return cfg;
  }
};

std::string theta_string(const Vector& theta) {
  std::string s;
  for (Index k = 0; k < theta.size(); ++k) {
    if (k > 0) s += ',';
    s += format_double(theta(k));
  }
  return s;
}

fs::path dataset_path(const ExperimentConfig& cfg, Index n) {
  return fs::path(cfg.out_dir) / ("dataset_N" + std::to_string(n) + ".txt");
}

int cmd_generate(const Overrides& o) {
  const ExperimentConfig cfg = o.resolve();
  fs::create_directories(cfg.out_dir);
  for (Index n : cfg.particle_counts) {
    const Dataset d = generate_dataset(cfg, n, &std::cerr);
    const fs::path path = dataset_path(cfg, n);
    save_dataset(path, d);
    std::cout << "wrote " << path.string() << '\n';
  }
  return kExitOk;
}

int cmd_train(const Overrides& o, const std::string& dataset_file, const std::string& algorithm) {
  ExperimentConfig cfg = o.resolve();
  const Algorithm alg = parse_algorithm(algorithm);
  Dataset data;
  if (!dataset_file.empty()) {
    data = load_dataset(dataset_file);
    cfg.grid = data.grid;
  } else {
    if (cfg.particle_counts.size() != 1) {
      throw ConfigError("train needs --dataset or exactly one --particles value");
    }
    data = generate_dataset(cfg, cfg.particle_counts.front(), &std::cerr);
  }
  fs::create_directories(cfg.out_dir);
  const fs::path csv = fs::path(cfg.out_dir) / ("train_" + std::string(to_string(alg)) + "_N" +
                                                std::to_string(data.num_particles) + ".csv");
  std::ofstream out(csv);
  if (!out) throw Error("cannot write " + csv.string());
  CsvRecordSink sink(out);
  const RunSummaryEntry e = run_single(cfg, data, alg, &sink);
  std::cout << "status          " << to_string(e.status) << '\n'
            << "epochs          " << e.epochs_run << '\n'
            << "final SSE       " << format_double(e.final_sse) << '\n'
            << "final RSSE(ODE) " << format_double(e.final_rsse_ode) << '\n'
            << "test mean RSSE  " << format_double(e.test_mean_rsse) << '\n'
            << "mean epoch [s]  " << format_double(e.mean_epoch_seconds) << '\n'
            << "theta           " << theta_string(e.theta) << '\n'
            << "record          " << csv.string() << '\n';
  if (!e.message.empty()) std::cout << "message         " << e.message << '\n';
  const bool failed = e.status == RunStatus::diverged || e.status == RunStatus::solver_failed;
  return failed ? kExitRunFailure : kExitOk;
}

int cmd_evaluate(const std::string& dataset_file, const std::vector<double>& theta_values,
                 const std::string& config_path) {
  const ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
  const Dataset data = load_dataset(dataset_file);
  if (static_cast<Index>(theta_values.size()) != CSParams::size) {
    throw ConfigError("--theta needs " + std::to_string(CSParams::size) + " values");
  }
  const Vector theta = Eigen::Map<const Vector>(theta_values.data(), CSParams::size);
  const CuckerSmale field(data.num_particles);
  const IdentityObservation obs(4 * data.num_particles);
  const TestEvaluation t = evaluate_test(field, theta, data.test_x0s, data.truth.to_vector(),
                                         data.grid, cfg.solver, obs);
  std::cout << "test mean RSSE " << format_double(t.mean_rsse) << " over " << t.evaluated
            << " trajectories (" << t.failures << " failed)\n";
  return t.failures > 0 ? kExitRunFailure : kExitOk;
}

int cmd_bench(const Overrides& o) {
  const ExperimentConfig cfg = o.resolve();
  const RunSummary summary = run_benchmark(cfg, &std::cerr);
  std::cout << "summary written to " << (fs::path(cfg.out_dir) / "summary.json").string() << '\n';
  return summary.any_failure() ? kExitRunFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter estimation for ODE models by collocation residuals"};
  app.require_subcommand(1);

  Overrides gen_o, train_o, bench_o;
  auto* gen = app.add_subcommand("generate", "Generate training data and test initial states");
  gen_o.attach(gen, false, false);

  auto* train = app.add_subcommand("train", "Train one algorithm on one dataset");
  train_o.attach(train, false, false);
  std::string train_dataset;
  std::string train_alg = "alg1";
  train->add_option("--dataset", train_dataset, "Dataset file from `generate`")
      ->check(CLI::ExistingFile);
  train->add_option("--algorithm", train_alg, "alg0, alg1, alg2 or alg3");

  auto* eval = app.add_subcommand("evaluate", "Test-set RSSE for given parameters");
  std::string eval_dataset;
  std::string eval_config;
  std::vector<double> eval_theta;
  eval->add_option("--dataset", eval_dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  eval->add_option("--theta", eval_theta, "gamma,c_a,c_r,l_a,l_r")->required()->delimiter(',');
  eval->add_option("--config", eval_config, "Config supplying solver settings")
      ->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "Sweep algorithms and particle counts");
  bench_o.attach(bench, true, true);

  auto* check = app.add_subcommand("check", "Run oracle and invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(gen_o);
    if (*train) return cmd_train(train_o, train_dataset, train_alg);
    if (*eval) return cmd_evaluate(eval_dataset, eval_theta, eval_config);
    if (*bench) return cmd_bench(bench_o);
    if (*check) return cli::run_self_checks(std::cout) ? kExitOk : kExitRunFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  }
  return kExitOk;
}
