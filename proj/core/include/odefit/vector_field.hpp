#pragma once

#include <memory>
#include <vector>

#include "odefit/types.hpp"

namespace odefit {

/// Right-hand side retained at one evaluation point, so that transposed
/// Jacobian products at that point reuse the work done for the value.
class PointLinearization {
 public:
  virtual ~PointLinearization() = default;

  /// f(x; theta) at the linearization point.
  const Vector& value() const noexcept { return value_; }

  /// wx = (df/dx)^T w and wtheta = (df/dtheta)^T w. Either output may be null.
  /// Outputs are overwritten and resized as needed.
  virtual void vjp(ConstVectorRef w, Vector* wx, Vector* wtheta) const = 0;

 protected:
  Vector value_;
};

/// Autonomous parameterized ODE right-hand side xdot = f(x; theta) with
/// analytic Jacobians. Implementations must be immutable after construction
/// and safe to call from several threads at once.
class VectorField {
 public:
  virtual ~VectorField() = default;

  virtual Index state_dim() const = 0;
  virtual Index param_dim() const = 0;

  /// out = f(x; theta). `out` must already have state_dim() entries.
  virtual void eval(ConstVectorRef x, ConstVectorRef theta, VectorRef out) const = 0;
  /// n x n.
  virtual Matrix jac_state(ConstVectorRef x, ConstVectorRef theta) const = 0;
  /// n x p.
  virtual Matrix jac_params(ConstVectorRef x, ConstVectorRef theta) const = 0;

  /// Forward sensitivity right-hand side: dx = f, dS = (df/dx) S + df/dtheta
  /// with S of shape n x p. The default forms both Jacobians densely.
  virtual void sensitivity_rhs(ConstVectorRef x, ConstVectorRef theta, ConstMatrixRef sens,
                               VectorRef dx, MatrixRef dsens) const;

  /// Evaluates f at (x, theta) and keeps what later vjp() calls need.
  /// The default stores dense Jacobians.
  virtual std::unique_ptr<PointLinearization> linearize(ConstVectorRef x,
                                                        ConstVectorRef theta) const;

  Vector operator()(ConstVectorRef x, ConstVectorRef theta) const;

  /// Throws DimensionError unless x and theta have the expected sizes.
  void check_dims(ConstVectorRef x, ConstVectorRef theta) const;
};

/// Observation map y = h(x). The identity is the default everywhere.
class ObservationMap {
 public:
  virtual ~ObservationMap() = default;

  virtual Index in_dim() const = 0;
  virtual Index out_dim() const = 0;
  virtual void eval(ConstVectorRef x, VectorRef y) const = 0;
  /// m x n.
  virtual Matrix jac(ConstVectorRef x) const = 0;
  /// out = (dh/dx)^T w, resized to in_dim().
  virtual void vjp(ConstVectorRef x, ConstVectorRef w, Vector& out) const;

  Vector operator()(ConstVectorRef x) const;
};

class IdentityObservation final : public ObservationMap {
 public:
  explicit IdentityObservation(Index dim) : dim_(dim) {}

  Index in_dim() const override { return dim_; }
  Index out_dim() const override { return dim_; }
  void eval(ConstVectorRef x, VectorRef y) const override { y = x; }
  Matrix jac(ConstVectorRef x) const override;
  void vjp(ConstVectorRef x, ConstVectorRef w, Vector& out) const override;

 private:
  Index dim_;
};

/// Observes a fixed subset of state components, in the given order.
class ComponentObservation final : public ObservationMap {
 public:
  ComponentObservation(Index state_dim, std::vector<Index> components);

  Index in_dim() const override { return state_dim_; }
  Index out_dim() const override { return static_cast<Index>(components_.size()); }
  void eval(ConstVectorRef x, VectorRef y) const override;
  Matrix jac(ConstVectorRef x) const override;
  void vjp(ConstVectorRef x, ConstVectorRef w, Vector& out) const override;

 private:
  Index state_dim_;
  std::vector<Index> components_;
};

/// Reparameterizes an inner field by theta = exp(phi), so that optimizing phi
/// keeps every inner parameter strictly positive.
class LogParameterized final : public VectorField {
 public:
  explicit LogParameterized(const VectorField& inner) : inner_(inner) {}

  Index state_dim() const override { return inner_.state_dim(); }
  Index param_dim() const override { return inner_.param_dim(); }
  void eval(ConstVectorRef x, ConstVectorRef phi, VectorRef out) const override;
  Matrix jac_state(ConstVectorRef x, ConstVectorRef phi) const override;
  Matrix jac_params(ConstVectorRef x, ConstVectorRef phi) const override;
  std::unique_ptr<PointLinearization> linearize(ConstVectorRef x,
                                                ConstVectorRef phi) const override;

  static Vector to_natural(ConstVectorRef phi) { return phi.array().exp().matrix(); }
  static Vector from_natural(ConstVectorRef theta) { return theta.array().log().matrix(); }

 private:
  const VectorField& inner_;
};

/// Maximum entrywise relative error (denominator max(1, |fd|)) between the
/// analytic Jacobians of `field` and central finite differences with the given
/// step, over both df/dx and df/dtheta. Throws EvaluationError if the field
/// is non-finite at any perturbed point.
double fd_check_jacobians(const VectorField& field, ConstVectorRef point, ConstVectorRef params,
                          double step);

/// Central-difference Jacobians, exposed for tests and the `check` command.
Matrix fd_jac_state(const VectorField& field, ConstVectorRef point, ConstVectorRef params,
                    double step);
Matrix fd_jac_params(const VectorField& field, ConstVectorRef point, ConstVectorRef params,
                     double step);

}  // namespace odefit
