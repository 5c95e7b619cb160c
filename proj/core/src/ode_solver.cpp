#include "odefit/ode_solver.hpp"

#include <cmath>
#include <string>

#include "integrator.hpp"
#include "odefit/errors.hpp"

namespace odefit {

void TimeGrid::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("time grid spacing must be positive");
  if (num_intervals < 1) throw ConfigError("time grid needs at least one interval");
  if (!std::isfinite(t0)) throw ConfigError("time grid origin must be finite");
}

void SolverConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("solver tolerances must be positive");
  if (max_steps < 1) throw ConfigError("solver step budget must be positive");
  if (!(safety > 0.0 && safety <= 1.0)) throw ConfigError("solver safety factor must be in (0, 1]");
  if (!(min_scale > 0.0 && min_scale < 1.0) || !(max_scale > 1.0)) {
    throw ConfigError("solver step-scale limits must satisfy 0 < min < 1 < max");
  }
  if (rk4_substeps < 1) throw ConfigError("rk4 needs at least one substep per interval");
  if (initial_step && !(*initial_step > 0.0)) throw ConfigError("initial step must be positive");
}

Trajectory solve(const VectorField& field, ConstVectorRef theta, ConstVectorRef x0,
                 const TimeGrid& grid, const SolverConfig& config) {
  field.check_dims(x0, theta);
  const Vector params = theta;
  auto rhs = [&](const Vector& x, Vector& dx) { field.eval(x, params, dx); };
  Trajectory traj{grid, StateMatrix(grid.num_samples(), field.state_dim())};
  detail::integrate_on_grid(rhs, Vector(x0), grid, config, false,
                            [&](Index i, const Vector& x) { traj.states.row(i) = x.transpose(); });
  traj.states.row(0) = x0.transpose();
  return traj;
}

Dopri5StepResult dopri5_step(const VectorField& field, ConstVectorRef theta, double t,
                             ConstVectorRef x, double h_try, const SolverConfig& config) {
  field.check_dims(x, theta);
  if (!(h_try > 0.0)) throw std::invalid_argument("dopri5_step needs a positive step");
  const double h_min =
      16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
  if (h_try < h_min) {
    throw SolverError(SolverError::Kind::step_underflow, t, false,
                      "dopri5_step: step " + std::to_string(h_try) + " underflows at t = " +
                          std::to_string(t));
  }
  const Vector params = theta;
  auto rhs = [&](const Vector& y, Vector& dy) { field.eval(y, params, dy); };
  using Rhs = decltype(rhs);
  const Vector x_start = x;
  Vector k1(x.size());
  rhs(x_start, k1);
  detail::Dopri5Stages<Rhs> stages;
  Dopri5StepResult out;
  stages.step(rhs, x_start, k1, h_try, out.x_next);
  out.error_norm = detail::weighted_rms(stages.err, x_start, out.x_next, config);
  out.accepted = out.error_norm <= 1.0;
  detail::StepController control(config);
  out.h_next = control.propose(h_try, out.error_norm, out.accepted);
  return out;
}

}  // namespace odefit
