#pragma once

#include <optional>
#include <vector>

#include "odefit/ode_solver.hpp"

namespace odefit {

/// Sum of squared entrywise differences. Throws DimensionError on shape mismatch.
double sse(const StateMatrix& pred, const StateMatrix& target);

/// Relative SSE, pooled over all entries:
///   sum |pred - target|^2 / sum |target|^2.
/// Throws MetricError when the target is identically zero.
double rsse(const StateMatrix& pred, const StateMatrix& target);

/// h applied row by row.
StateMatrix observe(const ObservationMap& obs, const StateMatrix& states);

/// Solves the ODE at theta from x0, observes it and returns the RSSE against
/// `target`. A solver failure yields std::nullopt instead of a number.
std::optional<double> rsse_on_ode(const VectorField& field, ConstVectorRef theta,
                                  ConstVectorRef x0, const TimeGrid& grid,
                                  const SolverConfig& solver, const ObservationMap& obs,
                                  const StateMatrix& target);

struct MetricReport {
  double sse = 0.0;
  double rsse = 0.0;
  std::vector<double> per_trajectory_rsse;  ///< filled for test-set evaluations
};

}  // namespace odefit
