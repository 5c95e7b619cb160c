#include "odefit/simple_fields.hpp"

#include "odefit/errors.hpp"

namespace odefit {

AffineField::AffineField(Matrix a0, Vector b0, std::vector<Matrix> a, std::vector<Vector> b)
    : a0_(std::move(a0)), b0_(std::move(b0)), a_(std::move(a)), b_(std::move(b)) {
  const Index n = a0_.rows();
  if (a0_.cols() != n || b0_.size() != n || a_.size() != b_.size()) {
    throw DimensionError("affine field: inconsistent block sizes");
  }
  for (std::size_t k = 0; k < a_.size(); ++k) {
    if (a_[k].rows() != n || a_[k].cols() != n || b_[k].size() != n) {
      throw DimensionError("affine field: parameter block has the wrong size");
    }
  }
}

void AffineField::eval(ConstVectorRef x, ConstVectorRef theta, VectorRef out) const {
  out.noalias() = a0_ * x;
  out += b0_;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    out.noalias() += theta(static_cast<Index>(k)) * (a_[k] * x + b_[k]);
  }
}

Matrix AffineField::jac_state(ConstVectorRef, ConstVectorRef theta) const {
  Matrix j = a0_;
  for (std::size_t k = 0; k < a_.size(); ++k) j += theta(static_cast<Index>(k)) * a_[k];
  return j;
}

Matrix AffineField::jac_params(ConstVectorRef x, ConstVectorRef) const {
  Matrix j(state_dim(), param_dim());
  for (std::size_t k = 0; k < a_.size(); ++k) j.col(static_cast<Index>(k)) = a_[k] * x + b_[k];
  return j;
}

AffineField AffineField::zero(Index n, Index p) {
  return AffineField(Matrix::Zero(n, n), Vector::Zero(n),
                     std::vector<Matrix>(static_cast<std::size_t>(p), Matrix::Zero(n, n)),
                     std::vector<Vector>(static_cast<std::size_t>(p), Vector::Zero(n)));
}

AffineField AffineField::decay(double rate) {
  return AffineField(Matrix::Constant(1, 1, rate), Vector::Zero(1), {Matrix::Zero(1, 1)},
                     {Vector::Zero(1)});
}

AffineField AffineField::scalar_growth() {
  return AffineField(Matrix::Zero(1, 1), Vector::Zero(1), {Matrix::Identity(1, 1)},
                     {Vector::Zero(1)});
}

AffineField AffineField::harmonic_oscillator() {
  Matrix a0(2, 2);
  a0 << 0.0, 1.0, -1.0, 0.0;
  return AffineField(a0, Vector::Zero(2), {Matrix::Zero(2, 2)}, {Vector::Zero(2)});
}

AffineField AffineField::drift(Index n) {
  std::vector<Matrix> a(static_cast<std::size_t>(n), Matrix::Zero(n, n));
  std::vector<Vector> b;
  for (Index k = 0; k < n; ++k) b.push_back(Vector::Unit(n, k));
  return AffineField(Matrix::Zero(n, n), Vector::Zero(n), std::move(a), std::move(b));
}

}  // namespace odefit
