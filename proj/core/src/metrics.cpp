#include "odefit/metrics.hpp"

#include <string>

#include "odefit/errors.hpp"

namespace odefit {
namespace {

void check_same_shape(const StateMatrix& a, const StateMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": prediction is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " but target is " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
  }
}

}  // namespace

double sse(const StateMatrix& pred, const StateMatrix& target) {
  check_same_shape(pred, target, "sse");
  return (pred - target).squaredNorm();
}

double rsse(const StateMatrix& pred, const StateMatrix& target) {
  check_same_shape(pred, target, "rsse");
  const double energy = target.squaredNorm();
  if (!(energy > 0.0)) throw MetricError("rsse is undefined for an all-zero target");
  return (pred - target).squaredNorm() / energy;
}

StateMatrix observe(const ObservationMap& obs, const StateMatrix& states) {
  StateMatrix out(states.rows(), obs.out_dim());
  Vector y(obs.out_dim());
  for (Index i = 0; i < states.rows(); ++i) {
    obs.eval(states.row(i).transpose(), y);
    out.row(i) = y.transpose();
  }
  return out;
}

std::optional<double> rsse_on_ode(const VectorField& field, ConstVectorRef theta,
                                  ConstVectorRef x0, const TimeGrid& grid,
                                  const SolverConfig& solver, const ObservationMap& obs,
                                  const StateMatrix& target) {
  Trajectory traj;
  try {
    traj = solve(field, theta, x0, grid, solver);
  } catch (const SolverError&) {
    return std::nullopt;
  } catch (const EvaluationError&) {
    return std::nullopt;
  }
  return rsse(observe(obs, traj.states), target);
}

}  // namespace odefit
