#pragma once

#include <vector>

#include "odefit/ode_solver.hpp"

namespace odefit {

/// values[i] = d x(t_i) / d theta, an n x p matrix per sample. values[0] is
/// zero because the initial condition is data, not a parameter.
struct SensitivityTensor {
  std::vector<Matrix> values;
};

struct SensitiveTrajectory {
  Trajectory trajectory;
  SensitivityTensor sensitivity;
};

/// Integrates x together with S = dx/dtheta,
///
///   Sdot = (df/dx) S + df/dtheta,   S(t0) = 0,
///
/// as one augmented system of size n (p + 1). Error control applies
/// componentwise to the whole augmented state with the same tolerances.
/// Failures raise SolverError with in_sensitivity() == true.
SensitiveTrajectory solve_with_sensitivity(const VectorField& field, ConstVectorRef theta,
                                           ConstVectorRef x0, const TimeGrid& grid,
                                           const SolverConfig& config = {});

/// Gradient of Lbar(theta) = SSE(h(xhat(theta)), targets):
///
///   sum_i S_i^T (dh/dx)^T 2 (h(x_i) - y_i).
Vector loss_grad_theta(const Trajectory& traj, const SensitivityTensor& sens,
                       const ObservationMap& obs, const StateMatrix& targets);

}  // namespace odefit
