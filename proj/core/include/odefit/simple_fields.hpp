#pragma once

#include <vector>

#include "odefit/vector_field.hpp"

namespace odefit {

/// Affine-in-parameters field
///
///   f(x; theta) = (A0 x + b0) + sum_k theta_k (A_k x + b_k).
///
/// Small closed-form models used throughout the tests and the `check`
/// command: exponential decay, scalar growth xdot = theta x, the harmonic
/// oscillator, constant drift, and the zero field are all instances.
class AffineField final : public VectorField {
 public:
  AffineField(Matrix a0, Vector b0, std::vector<Matrix> a, std::vector<Vector> b);

  Index state_dim() const override { return a0_.rows(); }
  Index param_dim() const override { return static_cast<Index>(a_.size()); }
  void eval(ConstVectorRef x, ConstVectorRef theta, VectorRef out) const override;
  Matrix jac_state(ConstVectorRef x, ConstVectorRef theta) const override;
  Matrix jac_params(ConstVectorRef x, ConstVectorRef theta) const override;

  /// f = 0 on R^n with p ignored parameters.
  static AffineField zero(Index n, Index p = 1);
  /// f = rate * x, no parameters beyond one unused slot.
  static AffineField decay(double rate);
  /// xdot = theta x (scalar).
  static AffineField scalar_growth();
  /// xdot = v, vdot = -x.
  static AffineField harmonic_oscillator();
  /// xdot = theta, one parameter per component.
  static AffineField drift(Index n);

 private:
  Matrix a0_;
  Vector b0_;
  std::vector<Matrix> a_;
  std::vector<Vector> b_;
};

}  // namespace odefit
