#include "odefit/sensitivity.hpp"

#include <string>

#include "integrator.hpp"
#include "odefit/errors.hpp"

namespace odefit {

SensitiveTrajectory solve_with_sensitivity(const VectorField& field, ConstVectorRef theta,
                                           ConstVectorRef x0, const TimeGrid& grid,
                                           const SolverConfig& config) {
  field.check_dims(x0, theta);
  const Index n = field.state_dim();
  const Index p = field.param_dim();
  const Vector params = theta;

  // Augmented layout: [x; vec(S)] with S stored column-major.
  auto rhs = [&](const Vector& z, Vector& dz) {
    const Eigen::Map<const Matrix> sens(z.data() + n, n, p);
    Eigen::Map<Matrix> dsens(dz.data() + n, n, p);
    field.sensitivity_rhs(z.head(n), params, sens, dz.head(n), dsens);
  };

  Vector z0 = Vector::Zero(n * (p + 1));
  z0.head(n) = x0;

  SensitiveTrajectory out{Trajectory{grid, StateMatrix(grid.num_samples(), n)},
                          SensitivityTensor{std::vector<Matrix>(
                              static_cast<std::size_t>(grid.num_samples()))}};
  detail::integrate_on_grid(rhs, std::move(z0), grid, config, true, [&](Index i, const Vector& z) {
    out.trajectory.states.row(i) = z.head(n).transpose();
    out.sensitivity.values[static_cast<std::size_t>(i)] =
        Eigen::Map<const Matrix>(z.data() + n, n, p);
  });
  out.trajectory.states.row(0) = x0.transpose();
  return out;
}

Vector loss_grad_theta(const Trajectory& traj, const SensitivityTensor& sens,
                       const ObservationMap& obs, const StateMatrix& targets) {
  const StateMatrix& x = traj.states;
  if (static_cast<Index>(sens.values.size()) != x.rows() || targets.rows() != x.rows() ||
      targets.cols() != obs.out_dim() || x.cols() != obs.in_dim()) {
    throw DimensionError("loss_grad_theta: trajectory, sensitivity, observation and targets disagree");
  }
  const Index p = sens.values.empty() ? 0 : sens.values.front().cols();
  Vector grad = Vector::Zero(p);
  Vector y(obs.out_dim());
  Vector wx;
  for (Index i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i).transpose();
    obs.eval(xi, y);
    const Vector resid = 2.0 * (y - targets.row(i).transpose());
    obs.vjp(xi, resid, wx);
    grad.noalias() += sens.values[static_cast<std::size_t>(i)].transpose() * wx;
  }
  return grad;
}

}  // namespace odefit
