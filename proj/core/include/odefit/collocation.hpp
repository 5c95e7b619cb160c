#pragma once

#include "odefit/ode_solver.hpp"
#include "odefit/vector_field.hpp"

namespace odefit {

struct ResidualConfig {
  /// beta in x_c = (x_i + x_{i+1}) / 2 + beta h (f_i - f_{i+1}). The default
  /// 1/6 follows the published residual; 1/8 is the classical Hermite
  /// interpolant midpoint.
  double midpoint_coeff = 1.0 / 6.0;
  /// lambda_w in F = L~ + (lambda_w / 2) |r|^2.
  double residual_weight = 1.0;
  /// Worker threads for interval-parallel evaluation. Results do not depend on it.
  int threads = 1;

  void validate() const;
};

/// Multipliers for the augmented Lagrangian, one row per interval (N_t x n).
struct MultiplierState {
  StateMatrix lambda;
  double rho = 1.0;
};

/// Contiguous intervals [first, first + count) and the nodes first .. first + count
/// they touch. count < 0 means "through the last interval".
struct Window {
  Index first = 0;
  Index count = -1;
};

struct CollocationEval {
  double value = 0.0;        ///< F, or L_rho when multipliers are supplied
  double data_loss = 0.0;    ///< L~ over the window nodes
  double residual_sq = 0.0;  ///< |r|^2 over the window intervals
  StateMatrix residual;      ///< N_t x n, zero outside the window
  StateMatrix grad_x;        ///< (N_t + 1) x n when requested, zero outside the window
  Vector grad_theta;         ///< p when requested
};

/// Hermite-Simpson collocation objective over a uniform grid.
///
/// For free node states x_0 .. x_N the residual of interval i is
///
///   r_i = x_i - x_{i+1} + (h/6) [f(x_i) + f(x_{i+1}) + 4 f(x_c,i)],
///   x_c,i = (x_i + x_{i+1}) / 2 + beta h [f(x_i) - f(x_{i+1})],
///
/// and depends on (x_i, x_{i+1}, theta) only. The data term is
/// L~(x) = sum_k |h(x_k) - y_k|^2 (SSE). Two objectives are offered:
///
///   F(x, theta)          = L~(x) + (lambda_w / 2) |r|^2
///   L_rho(x, theta, mu)  = L~(x) + mu^T r + (rho / 2) |r|^2
///
/// Gradients are assembled from per-point transposed Jacobian products.
/// With w_i = mu_i + rho r_i and u_i = J(x_c,i)^T w_i, node k receives
///
///   a_k = (w_k + 4 beta h u_k) + (w_{k-1} - 4 beta h u_{k-1})
///
/// (terms present only for intervals inside the window), so a single product
/// J(x_k)^T a_k and df/dtheta(x_k)^T a_k per node suffices. Nodes and intervals
/// are evaluated independently (optionally in parallel); all sums are then
/// reduced in a fixed order, so results are bitwise independent of `threads`.
class HermiteSimpson {
 public:
  HermiteSimpson(const VectorField& field, const ObservationMap& obs, TimeGrid grid,
                 ResidualConfig cfg = {});

  const TimeGrid& grid() const { return grid_; }
  const ResidualConfig& config() const { return cfg_; }
  const VectorField& field() const { return field_; }
  const ObservationMap& observation() const { return obs_; }

  StateMatrix residual(const StateMatrix& x, ConstVectorRef theta, Window window = {}) const;
  double loss(const StateMatrix& x, ConstVectorRef theta, const StateMatrix& targets,
              Window window = {}) const;
  StateMatrix grad_x(const StateMatrix& x, ConstVectorRef theta, const StateMatrix& targets,
                     Window window = {}) const;
  Vector grad_theta(const StateMatrix& x, ConstVectorRef theta, const StateMatrix& targets,
                    Window window = {}) const;
  /// Value and both gradients of L_rho.
  CollocationEval auglag(const StateMatrix& x, ConstVectorRef theta, const MultiplierState& mult,
                         const StateMatrix& targets, Window window = {}) const;

  /// General entry point. With `mult` null the objective is F; otherwise L_rho.
  CollocationEval evaluate(const StateMatrix& x, ConstVectorRef theta,
                           const StateMatrix& targets, const MultiplierState* mult,
                           bool want_grad_x, bool want_grad_theta, Window window = {}) const;

  /// L~ over the window nodes; fills `grad` ((N_t + 1) x n, zero outside the
  /// window) when non-null.
  double data_loss(const StateMatrix& x, const StateMatrix& targets, Window window = {},
                   StateMatrix* grad = nullptr) const;

  /// Throws DimensionError if x or targets have the wrong shape, and
  /// std::invalid_argument for windows outside the grid.
  Window resolve(Window window) const;

 private:
  void check_shapes(const StateMatrix& x, const StateMatrix* targets) const;

  const VectorField& field_;
  const ObservationMap& obs_;
  TimeGrid grid_;
  ResidualConfig cfg_;
};

}  // namespace odefit
