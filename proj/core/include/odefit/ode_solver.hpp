#pragma once

#include <optional>

#include "odefit/types.hpp"
#include "odefit/vector_field.hpp"

namespace odefit {

/// Uniform sample times t_i = t0 + i h, i = 0 .. num_intervals.
struct TimeGrid {
  double t0 = 0.0;
  double h = 0.05;
  Index num_intervals = 100;

  double time(Index i) const { return t0 + static_cast<double>(i) * h; }
  Index num_samples() const { return num_intervals + 1; }
  double final_time() const { return time(num_intervals); }
  /// Throws ConfigError unless h > 0 and num_intervals >= 1.
  void validate() const;
  bool operator==(const TimeGrid&) const = default;
};

enum class SolverMethod { dopri5, rk4 };

struct SolverConfig {
  SolverMethod method = SolverMethod::dopri5;
  double rtol = 1e-6;
  double atol = 1e-8;
  /// Initial step for dopri5; chosen automatically from the local derivative when empty.
  std::optional<double> initial_step;
  long max_steps = 1'000'000;
  double safety = 0.9;
  double min_scale = 0.2;
  double max_scale = 5.0;
  /// rk4 takes this many equal steps per sample interval.
  int rk4_substeps = 1;

  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

struct Trajectory {
  TimeGrid grid;
  StateMatrix states;  ///< (num_intervals + 1) x n
};

/// Integrates xdot = f(x; theta) from x0 and reports the state at every grid
/// time. Steps are clipped so that each sample time is hit exactly; no
/// sensitivities are computed.
Trajectory solve(const VectorField& field, ConstVectorRef theta, ConstVectorRef x0,
                 const TimeGrid& grid, const SolverConfig& config = {});

struct Dopri5StepResult {
  Vector x_next;       ///< fifth-order solution at t + h_try
  double error_norm;   ///< weighted RMS of the embedded error estimate
  double h_next;       ///< proposed next step
  bool accepted;       ///< error_norm <= 1
};

/// One Dormand-Prince 5(4) step of size h_try from (t, x). The field is
/// autonomous; t is only carried for error reporting.
Dopri5StepResult dopri5_step(const VectorField& field, ConstVectorRef theta, double t,
                             ConstVectorRef x, double h_try, const SolverConfig& config = {});

}  // namespace odefit
