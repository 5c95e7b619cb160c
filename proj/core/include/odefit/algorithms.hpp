#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "odefit/collocation.hpp"
#include "odefit/ode_solver.hpp"
#include "odefit/optimizers.hpp"

namespace odefit {

enum class Algorithm {
  alg0_direct,  ///< gradient descent with a sensitivity-augmented solve per epoch
  alg1,         ///< alternating descent on collocation residuals, no solves in the loop
  alg2,         ///< alg1 with the states reset to an ODE solution every epoch
  alg3,         ///< alg1 on the augmented Lagrangian with multiplier ascent
};

std::string_view to_string(Algorithm alg);
/// Accepts "alg0", "alg0_direct", "alg1", "alg2", "alg3". Throws ConfigError.
Algorithm parse_algorithm(std::string_view name);

enum class ResetMode {
  global_x0,    ///< alg2 re-solves the whole horizon from x0
  local_state,  ///< alg2 re-solves only the window, from the current estimate of its first node
};

struct MinibatchConfig {
  Index window = 10;  ///< intervals per mini-batch (Delta)
  ResetMode reset_mode = ResetMode::global_x0;
  bool operator==(const MinibatchConfig&) const = default;
};

struct TrainConfig {
  Algorithm algorithm = Algorithm::alg1;
  int epochs = 5000;
  OptimizerConfig state_optimizer{OptimizerKind::sgd, 0.01};
  OptimizerConfig param_optimizer{OptimizerKind::adam, 0.01};
  /// Early stop once |grad_theta| drops below this value.
  std::optional<double> grad_norm_tol;
  std::optional<MinibatchConfig> minibatch;
  double rho = 1.0;  ///< alg3 penalty weight and multiplier step
  std::uint64_t seed = 0;
  ResidualConfig residual;
  /// RSSE-on-ODE is logged every this many epochs (and on the last epoch);
  /// 0 disables it. It is computed outside the timed epoch body.
  int rsse_every = 0;

  /// Default stepsizes: alg0 Adam(0.01); alg1 SGD(0.01) + Adam(0.01);
  /// alg2 SGD(1) + Adam(0.01); alg3 SGD(0.01) + SGD(1).
  static TrainConfig defaults_for(Algorithm alg);
  void validate(Index num_intervals) const;
};

struct EpochRow {
  int epoch = 0;
  double sse = 0.0;
  double rsse_ode = std::numeric_limits<double>::quiet_NaN();
  double grad_theta_norm = 0.0;
  double grad_x_norm = std::numeric_limits<double>::quiet_NaN();
  double residual_norm = std::numeric_limits<double>::quiet_NaN();
  double epoch_seconds = 0.0;
};

struct TrainRecord {
  std::vector<EpochRow> rows;
  /// RSSE-on-ODE at the initial parameters (NaN when monitoring is off).
  double initial_rsse_ode = std::numeric_limits<double>::quiet_NaN();
};

/// Receives every epoch row as soon as it is complete.
class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual void on_epoch(const EpochRow& row) = 0;
};

/// Instrumentation for tests.
struct TrainHooks {
  /// Invoked immediately before each theta-gradient evaluation of alg1/alg2/alg3
  /// with the states and parameters that evaluation uses.
  std::function<void(int epoch, const StateMatrix& x, const Vector& theta)> before_theta_gradient;
};

struct CallCounts {
  int solves = 0;
  int sensitivity_solves = 0;
};

enum class RunStatus {
  completed,      ///< ran the full epoch budget
  converged,      ///< stopped on grad_norm_tol
  diverged,       ///< loss or gradient became non-finite, or the field failed
  solver_failed,  ///< an ODE solve inside the loop failed
};
std::string_view to_string(RunStatus status);

struct TrainResult {
  Vector theta;
  StateMatrix x;       ///< final state block (last solve for alg0)
  StateMatrix lambda;  ///< final multipliers (alg3 only)
  TrainRecord record;
  RunStatus status = RunStatus::completed;
  std::string message;
  CallCounts calls;
  /// |r(x, theta)| at the returned (x, theta); NaN if it could not be evaluated.
  double final_residual_norm = std::numeric_limits<double>::quiet_NaN();
};

/// Everything a training run needs besides the initial iterate.
struct Problem {
  const VectorField& field;
  const ObservationMap& obs;
  StateMatrix targets;  ///< (N_t + 1) x m
  Vector x0;
  TimeGrid grid;
  SolverConfig solver;
};

struct TrainInit {
  Vector theta;
  /// alg1/alg3 start from these states instead of a solve at theta.
  std::optional<StateMatrix> states{};
  /// alg3 multipliers (N_t x n); zero when empty.
  std::optional<StateMatrix> lambda{};
};

TrainResult run_alg0(const Problem& problem, const TrainInit& init, const TrainConfig& cfg,
                     RecordSink* sink = nullptr, const TrainHooks* hooks = nullptr);
TrainResult run_alg1(const Problem& problem, const TrainInit& init, const TrainConfig& cfg,
                     RecordSink* sink = nullptr, const TrainHooks* hooks = nullptr);
TrainResult run_alg2(const Problem& problem, const TrainInit& init, const TrainConfig& cfg,
                     RecordSink* sink = nullptr, const TrainHooks* hooks = nullptr);
TrainResult run_alg3(const Problem& problem, const TrainInit& init, const TrainConfig& cfg,
                     RecordSink* sink = nullptr, const TrainHooks* hooks = nullptr);

/// Dispatches on cfg.algorithm.
TrainResult train(const Problem& problem, const TrainInit& init, const TrainConfig& cfg,
                  RecordSink* sink = nullptr, const TrainHooks* hooks = nullptr);

/// Uniform window starts in [0, num_intervals - window].
class MinibatchSampler {
 public:
  MinibatchSampler(std::uint64_t seed, Index num_intervals, Index window);
  Index next();

 private:
  std::mt19937_64 rng_;
  std::uniform_int_distribution<Index> dist_;
};

std::vector<Index> minibatch_schedule(std::uint64_t seed, Index num_intervals, Index window,
                                      std::size_t count);

/// Relative deviation between two ways of taking one step at theta:
///
///  composed: reset x = xhat(theta), x' = x - alpha_x grad L~(x), then
///            theta' = theta - alpha_theta (d rt/d theta)^T rt(x', theta) with
///            the exact-solution residual rt(x, theta) = x - xhat(theta);
///  direct:   theta' = theta - alpha_x alpha_theta grad Lbar(theta) via sensitivities.
///
/// Returns |step_composed - step_direct| / |step_direct| (0 when both vanish).
double check_alg0_recovery(const Problem& problem, ConstVectorRef theta, double alpha_x,
                           double alpha_theta);

}  // namespace odefit
