#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "odefit/algorithms.hpp"
#include "odefit/cucker_smale.hpp"
#include "odefit/dataset_io.hpp"

namespace odefit {

struct SampleRange {
  double lo = 0.0;
  double hi = 1.0;
  bool log_uniform = false;
  bool operator==(const SampleRange&) const = default;
};

/// Sampling box for ground-truth parameters.
struct ParamRanges {
  SampleRange gamma{0.1, 1.5, false};
  SampleRange c_a{0.5, 2.0, true};
  SampleRange c_r{0.5, 2.0, true};
  SampleRange l_a{1.0, 3.0, true};
  SampleRange l_r{0.3, 1.0, true};
  bool operator==(const ParamRanges&) const = default;
};

/// Random initial swarms: positions and velocities uniform in centred boxes,
/// rejected until every pair is at least `min_separation` apart.
struct SwarmSampler {
  double position_half_width = 2.0;
  double velocity_half_width = 0.5;
  double min_separation = 0.1;
  int max_attempts = 1000;
  bool operator==(const SwarmSampler&) const = default;
};

struct ExperimentConfig {
  std::string model = "cucker_smale";
  std::vector<Index> particle_counts{5, 10, 20, 50};
  TimeGrid grid;
  std::optional<CSParams> truth;  ///< sampled from `ranges` when empty
  ParamRanges ranges;
  SwarmSampler swarm;
  double init_perturbation = 0.2;  ///< init = truth * (1 + U(-p, p)) per entry
  double noise_std = 0.0;
  int epochs = 5000;
  int test_trajectories = 100;
  std::uint64_t seed = 0;
  std::vector<Algorithm> algorithms{Algorithm::alg0_direct, Algorithm::alg1, Algorithm::alg2};
  std::string out_dir = "runs";
  int threads = 1;  ///< sweep worker pool width
  SolverConfig solver;
  int rsse_every = 10;
  double midpoint_coeff = 1.0 / 6.0;
  double rho = 1.0;
  int generation_retries = 20;

  /// Throws ConfigError.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

std::string to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected. Throws ConfigError.
ExperimentConfig config_from_json(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

CSParams sample_params(std::mt19937_64& rng, const ParamRanges& ranges);
CSParams perturb_params(std::mt19937_64& rng, const CSParams& truth, double fraction);
Vector sample_swarm(std::mt19937_64& rng, Index num_particles, const SwarmSampler& box);

/// Truth and initial guess depend on the seed only, so every particle count
/// shares them; swarm states depend on (seed, N). Solver failures on a drawn
/// x0 are retried up to `generation_retries` times (reported to `log`)
/// before giving up with an Error.
Dataset generate_dataset(const ExperimentConfig& cfg, Index num_particles,
                         std::ostream* log = nullptr);

struct TestEvaluation {
  double mean_rsse = 0.0;  ///< NaN when every trajectory failed
  int evaluated = 0;
  int failures = 0;
};

/// Mean RSSE over test initial conditions of solve(theta) against
/// solve(truth). Failed trajectories are excluded and counted. Throws
/// MetricError on an empty test set.
TestEvaluation evaluate_test(const VectorField& field, ConstVectorRef theta,
                             const std::vector<Vector>& test_x0s, ConstVectorRef truth,
                             const TimeGrid& grid, const SolverConfig& solver,
                             const ObservationMap& obs);

/// Streams epoch rows as CSV.
class CsvRecordSink final : public RecordSink {
 public:
  explicit CsvRecordSink(std::ostream& out);
  void on_epoch(const EpochRow& row) override;
  static const char* header();

 private:
  std::ostream& out_;
};

struct RunSummaryEntry {
  Algorithm algorithm = Algorithm::alg1;
  Index num_particles = 0;
  int epochs_run = 0;
  double mean_epoch_seconds = 0.0;
  double total_seconds = 0.0;  ///< mean epoch time x epochs run
  double final_sse = 0.0;
  double final_rsse_ode = 0.0;
  double test_mean_rsse = 0.0;
  int test_failures = 0;
  RunStatus status = RunStatus::completed;
  std::string message;
  Vector theta;
};

struct RunSummary {
  std::vector<RunSummaryEntry> entries;
  bool any_failure() const;
};

std::string summary_to_json(const RunSummary& summary);

TrainConfig train_config_for(const ExperimentConfig& cfg, Algorithm alg);

/// Trains one algorithm on a dataset, streaming rows to `sink`, then
/// evaluates on the test set.
RunSummaryEntry run_single(const ExperimentConfig& cfg, const Dataset& data, Algorithm alg,
                           RecordSink* sink);

/// Full sweep over particle counts and algorithms. Writes under cfg.out_dir:
///   N<count>/<algorithm>.csv   per-epoch records
///   N<count>/dataset.txt       the generated data
///   plots/{sse,rsse}_N<count>.svg
///   summary.json
/// A failed run is recorded and does not stop the sweep.
RunSummary run_benchmark(const ExperimentConfig& cfg, std::ostream* log = nullptr);

}  // namespace odefit
