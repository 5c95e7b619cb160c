#include "odefit/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "odefit/errors.hpp"
#include "odefit/metrics.hpp"
#include "odefit/sensitivity.hpp"

namespace odefit {
namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_problem(const Problem& p) {
  p.grid.validate();
  p.solver.validate();
  const Index n = p.field.state_dim();
  if (p.x0.size() != n) {
    throw DimensionError("x0 has " + std::to_string(p.x0.size()) + " entries, field expects " +
                         std::to_string(n));
  }
  if (p.obs.in_dim() != n) throw DimensionError("observation input does not match the state");
  if (p.targets.rows() != p.grid.num_samples() || p.targets.cols() != p.obs.out_dim()) {
    throw DimensionError("targets must be " + std::to_string(p.grid.num_samples()) + "x" +
                         std::to_string(p.obs.out_dim()));
  }
}

void check_theta(const Problem& p, const Vector& theta) {
  if (theta.size() != p.field.param_dim()) {
    throw DimensionError("theta has " + std::to_string(theta.size()) + " entries, field expects " +
                         std::to_string(p.field.param_dim()));
  }
}

void require_finite(double value, const char* what, int epoch) {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string("non-finite ") + what + " at epoch " + std::to_string(epoch));
  }
}

void require_finite(const Vector& v, const char* what, int epoch) {
  if (!v.allFinite()) {
    throw NumericalError(std::string("non-finite ") + what + " at epoch " + std::to_string(epoch));
  }
}

double monitored_rsse(const Problem& p, const Vector& theta) {
  try {
    return rsse_on_ode(p.field, theta, p.x0, p.grid, p.solver, p.obs, p.targets).value_or(kNaN);
  } catch (const MetricError&) {
    return kNaN;
  }
}

/// Shared epoch driver: timing, monitoring, the sink and failure handling.
/// `body(epoch, row)` performs one epoch and returns true to stop early.
template <class Body>
void drive(const Problem& p, const TrainConfig& cfg, const Vector& theta, RecordSink* sink,
           TrainResult& result, Body&& body) {
  if (cfg.rsse_every > 0) result.record.initial_rsse_ode = monitored_rsse(p, theta);
  result.record.rows.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRow row;
    row.epoch = epoch;
    bool stop = false;
    const auto start = Clock::now();
    try {
      stop = body(epoch, row);
    } catch (const SolverError& e) {
      result.status = RunStatus::solver_failed;
      result.message = "epoch " + std::to_string(epoch) + ": " + e.what();
      return;
    } catch (const EvaluationError& e) {
      result.status = RunStatus::diverged;
      result.message = "epoch " + std::to_string(epoch) + ": " + e.what();
      return;
    } catch (const NumericalError& e) {
      result.status = RunStatus::diverged;
      result.message = e.what();
      return;
    }
    row.epoch_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool last = stop || epoch == cfg.epochs;
    if (cfg.rsse_every > 0 && (last || epoch % cfg.rsse_every == 0)) {
      row.rsse_ode = monitored_rsse(p, theta);
    }
    result.record.rows.push_back(row);
    if (sink != nullptr) sink->on_epoch(row);
    if (stop) {
      result.status = RunStatus::converged;
      return;
    }
  }
  result.status = RunStatus::completed;
}

bool below_tol(const TrainConfig& cfg, double grad_norm) {
  return cfg.grad_norm_tol.has_value() && grad_norm < *cfg.grad_norm_tol;
}

void finish_residual(const HermiteSimpson& obj, TrainResult& result) {
  try {
    result.final_residual_norm = obj.residual(result.x, result.theta).norm();
  } catch (const Error&) {
    result.final_residual_norm = kNaN;
  }
}

Window window_for(const TrainConfig& cfg, std::optional<MinibatchSampler>& sampler) {
  if (!sampler) return {};
  return Window{sampler->next(), cfg.minibatch->window};
}

std::optional<MinibatchSampler> make_sampler(const TrainConfig& cfg, const TimeGrid& grid) {
  if (!cfg.minibatch) return std::nullopt;
  return MinibatchSampler(cfg.seed, grid.num_intervals, cfg.minibatch->window);
}

/// Initial state block for the residual-based loops.
bool initial_states(const Problem& p, const TrainInit& init, TrainResult& result) {
  if (init.states) {
    if (init.states->rows() != p.grid.num_samples() || init.states->cols() != p.x0.size()) {
      throw DimensionError("initial states have the wrong shape");
    }
    result.x = *init.states;
  } else {
    try {
      result.x = solve(p.field, init.theta, p.x0, p.grid, p.solver).states;
    } catch (const SolverError& e) {
      result.status = RunStatus::solver_failed;
      result.message = std::string("initial solve: ") + e.what();
      return false;
    } catch (const EvaluationError& e) {
      result.status = RunStatus::solver_failed;
      result.message = std::string("initial solve: ") + e.what();
      return false;
    }
    result.calls.solves += 1;
  }
  result.x.row(0) = p.x0.transpose();
  return true;
}

/// Shared body of alg1 and alg3; `mult` selects the augmented Lagrangian.
TrainResult run_residual_loop(const Problem& p, const TrainInit& init, const TrainConfig& cfg,
                              RecordSink* sink, const TrainHooks* hooks, bool auglag) {
  check_problem(p);
  check_theta(p, init.theta);
  cfg.validate(p.grid.num_intervals);

  TrainResult result;
  result.theta = init.theta;
  MultiplierState mult;
  if (auglag) {
    mult.rho = cfg.rho;
    mult.lambda = init.lambda.value_or(StateMatrix::Zero(p.grid.num_intervals, p.x0.size()));
    if (mult.lambda.rows() != p.grid.num_intervals || mult.lambda.cols() != p.x0.size()) {
      throw DimensionError("multipliers must be N_t x n");
    }
  }
  if (!initial_states(p, init, result)) return result;

  const HermiteSimpson obj(p.field, p.obs, p.grid, cfg.residual);
  Optimizer state_opt(cfg.state_optimizer);
  Optimizer param_opt(cfg.param_optimizer);
  auto sampler = make_sampler(cfg, p.grid);
  const MultiplierState* mult_ptr = auglag ? &mult : nullptr;

  drive(p, cfg, result.theta, sink, result, [&](int epoch, EpochRow& row) {
    const Window window = window_for(cfg, sampler);

    CollocationEval ex = obj.evaluate(result.x, result.theta, p.targets, mult_ptr, true, false,
                                      window);
    require_finite(ex.value, "objective", epoch);
    ex.grad_x.row(0).setZero();
    require_finite(flat(ex.grad_x), "state gradient", epoch);
    state_opt.step(flat(result.x), flat(ex.grad_x));
    result.x.row(0) = p.x0.transpose();

    if (hooks != nullptr && hooks->before_theta_gradient) {
      hooks->before_theta_gradient(epoch, result.x, result.theta);
    }
    const CollocationEval et = obj.evaluate(result.x, result.theta, p.targets, mult_ptr, false,
                                            true, window);
    require_finite(et.value, "objective", epoch);
    require_finite(et.grad_theta, "parameter gradient", epoch);

    row.sse = ex.data_loss;
    row.grad_x_norm = flat(ex.grad_x).norm();
    row.grad_theta_norm = et.grad_theta.norm();
    row.residual_norm = std::sqrt(et.residual_sq);
    if (below_tol(cfg, row.grad_theta_norm)) return true;

    param_opt.step(result.theta, et.grad_theta);
    require_finite(result.theta, "parameters", epoch);

    if (auglag) {
      const StateMatrix r = obj.residual(result.x, result.theta, window);
      require_finite(flat(r), "residual", epoch);
      mult.lambda += cfg.rho * r;
      row.residual_norm = flat(r).norm();
    }
    return false;
  });

  if (auglag) result.lambda = std::move(mult.lambda);
  finish_residual(obj, result);
  return result;
}

}  // namespace

std::string_view to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::alg0_direct: return "alg0_direct";
    case Algorithm::alg1: return "alg1";
    case Algorithm::alg2: return "alg2";
    case Algorithm::alg3: return "alg3";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "alg0" || name == "alg0_direct") return Algorithm::alg0_direct;
  if (name == "alg1") return Algorithm::alg1;
  if (name == "alg2") return Algorithm::alg2;
  if (name == "alg3") return Algorithm::alg3;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::converged: return "converged";
    case RunStatus::diverged: return "diverged";
    case RunStatus::solver_failed: return "solver_failed";
  }
  return "unknown";
}

TrainConfig TrainConfig::defaults_for(Algorithm alg) {
  TrainConfig cfg;
  cfg.algorithm = alg;
  cfg.state_optimizer = {OptimizerKind::sgd, alg == Algorithm::alg2 ? 1.0 : 0.01};
  // Momentum on theta destabilizes the primal-dual iteration of alg3, which
  // therefore takes plain gradient steps on theta.
  cfg.param_optimizer = alg == Algorithm::alg3 ? OptimizerConfig{OptimizerKind::sgd, 1.0}
                                               : OptimizerConfig{OptimizerKind::adam, 0.01};
  return cfg;
}

void TrainConfig::validate(Index num_intervals) const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  state_optimizer.validate();
  param_optimizer.validate();
  residual.validate();
  if (grad_norm_tol && !(*grad_norm_tol >= 0.0)) {
    throw ConfigError("grad_norm_tol must be non-negative");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be positive");
  if (rsse_every < 0) throw ConfigError("rsse_every must be non-negative");
  if (minibatch) {
    if (algorithm == Algorithm::alg0_direct) {
      throw ConfigError("mini-batching applies to the residual-based algorithms only");
    }
    if (minibatch->window < 1 || minibatch->window > num_intervals) {
      throw ConfigError("mini-batch window must lie in [1, " + std::to_string(num_intervals) +
                        "]");
    }
  }
}

TrainResult run_alg0(const Problem& p, const TrainInit& init, const TrainConfig& cfg,
                     RecordSink* sink, const TrainHooks* /*hooks*/) {
  check_problem(p);
  check_theta(p, init.theta);
  cfg.validate(p.grid.num_intervals);

  TrainResult result;
  result.theta = init.theta;
  Optimizer param_opt(cfg.param_optimizer);

  drive(p, cfg, result.theta, sink, result, [&](int epoch, EpochRow& row) {
    const SensitiveTrajectory st =
        solve_with_sensitivity(p.field, result.theta, p.x0, p.grid, p.solver);
    result.calls.sensitivity_solves += 1;
    const StateMatrix pred = observe(p.obs, st.trajectory.states);
    row.sse = sse(pred, p.targets);
    require_finite(row.sse, "loss", epoch);
    const Vector g = loss_grad_theta(st.trajectory, st.sensitivity, p.obs, p.targets);
    require_finite(g, "parameter gradient", epoch);
    row.grad_theta_norm = g.norm();
    result.x = st.trajectory.states;
    if (below_tol(cfg, row.grad_theta_norm)) return true;
    param_opt.step(result.theta, g);
    require_finite(result.theta, "parameters", epoch);
    return false;
  });

  if (result.x.size() > 0) {
    finish_residual(HermiteSimpson(p.field, p.obs, p.grid, cfg.residual), result);
  }
  return result;
}

TrainResult run_alg1(const Problem& p, const TrainInit& init, const TrainConfig& cfg,
                     RecordSink* sink, const TrainHooks* hooks) {
  return run_residual_loop(p, init, cfg, sink, hooks, false);
}

TrainResult run_alg3(const Problem& p, const TrainInit& init, const TrainConfig& cfg,
                     RecordSink* sink, const TrainHooks* hooks) {
  return run_residual_loop(p, init, cfg, sink, hooks, true);
}

TrainResult run_alg2(const Problem& p, const TrainInit& init, const TrainConfig& cfg,
                     RecordSink* sink, const TrainHooks* hooks) {
  check_problem(p);
  check_theta(p, init.theta);
  cfg.validate(p.grid.num_intervals);

  TrainResult result;
  result.theta = init.theta;
  const bool local =
      cfg.minibatch.has_value() && cfg.minibatch->reset_mode == ResetMode::local_state;
  if (local) {
    // Window resets start from the current estimate, which needs a full block first.
    if (!initial_states(p, TrainInit{init.theta, init.states, std::nullopt}, result)) {
      return result;
    }
  } else {
    result.x = StateMatrix::Zero(p.grid.num_samples(), p.x0.size());
  }

  const HermiteSimpson obj(p.field, p.obs, p.grid, cfg.residual);
  Optimizer state_opt(cfg.state_optimizer);
  Optimizer param_opt(cfg.param_optimizer);
  auto sampler = make_sampler(cfg, p.grid);

  drive(p, cfg, result.theta, sink, result, [&](int epoch, EpochRow& row) {
    const Window window = window_for(cfg, sampler);

    if (local) {
      const Index first = window.first;
      const Index count = window.count;
      const TimeGrid sub{p.grid.time(first), p.grid.h, count};
      const Vector start = result.x.row(first).transpose();
      const Trajectory piece = solve(p.field, result.theta, start, sub, p.solver);
      result.x.middleRows(first, count + 1) = piece.states;
    } else {
      result.x = solve(p.field, result.theta, p.x0, p.grid, p.solver).states;
    }
    result.calls.solves += 1;
    result.x.row(0) = p.x0.transpose();

    // The reset makes the residual vanish, so grad_x F reduces to grad L~.
    StateMatrix gx;
    row.sse = obj.data_loss(result.x, p.targets, window, &gx);
    require_finite(row.sse, "loss", epoch);
    gx.row(0).setZero();
    require_finite(flat(gx), "state gradient", epoch);
    state_opt.step(flat(result.x), flat(gx));
    result.x.row(0) = p.x0.transpose();

    if (hooks != nullptr && hooks->before_theta_gradient) {
      hooks->before_theta_gradient(epoch, result.x, result.theta);
    }
    const CollocationEval et =
        obj.evaluate(result.x, result.theta, p.targets, nullptr, false, true, window);
    require_finite(et.value, "objective", epoch);
    require_finite(et.grad_theta, "parameter gradient", epoch);

    row.grad_x_norm = flat(gx).norm();
    row.grad_theta_norm = et.grad_theta.norm();
    row.residual_norm = std::sqrt(et.residual_sq);
    if (below_tol(cfg, row.grad_theta_norm)) return true;

    param_opt.step(result.theta, et.grad_theta);
    require_finite(result.theta, "parameters", epoch);
    return false;
  });

  finish_residual(obj, result);
  return result;
}

TrainResult train(const Problem& p, const TrainInit& init, const TrainConfig& cfg,
                  RecordSink* sink, const TrainHooks* hooks) {
  switch (cfg.algorithm) {
    case Algorithm::alg0_direct: return run_alg0(p, init, cfg, sink, hooks);
    case Algorithm::alg1: return run_alg1(p, init, cfg, sink, hooks);
    case Algorithm::alg2: return run_alg2(p, init, cfg, sink, hooks);
    case Algorithm::alg3: return run_alg3(p, init, cfg, sink, hooks);
  }
  throw ConfigError("unknown algorithm");
}

MinibatchSampler::MinibatchSampler(std::uint64_t seed, Index num_intervals, Index window)
    : rng_(seed), dist_(0, num_intervals - window) {
  if (window < 1 || window > num_intervals) {
    throw ConfigError("mini-batch window must lie in [1, num_intervals]");
  }
}

Index MinibatchSampler::next() { return dist_(rng_); }

std::vector<Index> minibatch_schedule(std::uint64_t seed, Index num_intervals, Index window,
                                      std::size_t count) {
  MinibatchSampler sampler(seed, num_intervals, window);
  std::vector<Index> starts(count);
  for (auto& s : starts) s = sampler.next();
  return starts;
}

double check_alg0_recovery(const Problem& p, ConstVectorRef theta, double alpha_x,
                           double alpha_theta) {
  check_problem(p);
  const Vector th = theta;
  check_theta(p, th);

  // Both sides share one solve: its state block is the reset point.
  const SensitiveTrajectory st = solve_with_sensitivity(p.field, th, p.x0, p.grid, p.solver);

  // Composed: reset, plain state step on L~, plain theta step on |rt|^2 / 2.
  const StateMatrix& reset = st.trajectory.states;
  const HermiteSimpson obj(p.field, p.obs, p.grid);
  StateMatrix gx;
  obj.data_loss(reset, p.targets, {}, &gx);
  const StateMatrix moved = reset - alpha_x * gx;
  const StateMatrix rt = moved - reset;

  const auto& sens = st.sensitivity.values;
  Vector grad_rt = Vector::Zero(th.size());
  for (Index i = 0; i < rt.rows(); ++i) {
    // d rt_i / d theta = -S_i
    grad_rt -= sens[static_cast<std::size_t>(i)].transpose() * rt.row(i).transpose();
  }
  const Vector step_composed = -alpha_theta * grad_rt;

  const Vector g = loss_grad_theta(st.trajectory, st.sensitivity, p.obs, p.targets);
  const Vector step_direct = -(alpha_x * alpha_theta) * g;

  const double denom = step_direct.norm();
  const double diff = (step_composed - step_direct).norm();
  if (denom == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / denom;
}

}  // namespace odefit
