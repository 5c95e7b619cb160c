#pragma once

#include <array>

#include "odefit/vector_field.hpp"

namespace odefit {

/// Parameters of the planar Cucker-Smale model with a Morse-type potential.
/// Serialized as theta = [gamma, c_a, c_r, l_a, l_r].
struct CSParams {
  double gamma = 1.0;  ///< communication decay exponent
  double c_a = 1.0;    ///< attraction strength
  double c_r = 1.0;    ///< repulsion strength
  double l_a = 1.0;    ///< attraction length
  double l_r = 1.0;    ///< repulsion length

  static constexpr Index size = 5;
  static constexpr std::array<const char*, 5> names{"gamma", "c_a", "c_r", "l_a", "l_r"};

  Vector to_vector() const;
  static CSParams from_vector(ConstVectorRef theta);
  bool operator==(const CSParams&) const = default;
};

/// N planar particles. Flat layout is [x_1 .. x_N, v_1 .. v_N], 4N entries,
/// each x_i and v_i stored as (first, second) coordinate pairs.
struct SwarmState {
  Matrix positions;   ///< N x 2
  Matrix velocities;  ///< N x 2

  Index num_particles() const { return positions.rows(); }
  Vector flatten() const;
  static SwarmState unflatten(ConstVectorRef flat);
};

/// H(r) = (1 + r^2)^(-gamma).
double communication_rate(double r, double gamma);

/// U'(r) for U(r) = -c_a exp(-r/l_a) + c_r exp(-r/l_r). Throws EvaluationError
/// for r <= 0 (the coincident pair is singular).
double potential_deriv(double r, const CSParams& params);

enum class CoincidentPolicy {
  error,      ///< distinct particles at the same position raise EvaluationError
  skip_pair,  ///< such pairs contribute nothing
};

/// xdot_i = v_i,
/// vdot_i = (1/N) sum_{j != i} [ H(|x_i - x_j|) (v_j - v_i) - U'(r_ij) (x_i - x_j) / r_ij ].
///
/// Pairwise quantities are computed once per unordered pair and shared by the
/// value and all derivative products at the same point.
class CuckerSmale final : public VectorField {
 public:
  explicit CuckerSmale(Index num_particles, CoincidentPolicy policy = CoincidentPolicy::error);

  Index num_particles() const { return num_particles_; }
  Index state_dim() const override { return 4 * num_particles_; }
  Index param_dim() const override { return CSParams::size; }

  void eval(ConstVectorRef x, ConstVectorRef theta, VectorRef out) const override;
  Matrix jac_state(ConstVectorRef x, ConstVectorRef theta) const override;
  Matrix jac_params(ConstVectorRef x, ConstVectorRef theta) const override;
  void sensitivity_rhs(ConstVectorRef x, ConstVectorRef theta, ConstMatrixRef sens,
                       VectorRef dx, MatrixRef dsens) const override;
  std::unique_ptr<PointLinearization> linearize(ConstVectorRef x,
                                                ConstVectorRef theta) const override;

 private:
  Index num_particles_;
  CoincidentPolicy policy_;
};

Vector cs_rhs(const SwarmState& state, const CSParams& params,
              CoincidentPolicy policy = CoincidentPolicy::error);
Matrix cs_jac_state(const SwarmState& state, const CSParams& params,
                    CoincidentPolicy policy = CoincidentPolicy::error);
Matrix cs_jac_params(const SwarmState& state, const CSParams& params,
                     CoincidentPolicy policy = CoincidentPolicy::error);

}  // namespace odefit
