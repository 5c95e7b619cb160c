#include <string>

#include "odefit/errors.hpp"
#include "odefit/vector_field.hpp"

namespace odefit {

void ObservationMap::vjp(ConstVectorRef x, ConstVectorRef w, Vector& out) const {
  out = jac(x).transpose() * w;
}

Vector ObservationMap::operator()(ConstVectorRef x) const {
  Vector y(out_dim());
  eval(x, y);
  return y;
}

Matrix IdentityObservation::jac(ConstVectorRef) const { return Matrix::Identity(dim_, dim_); }

void IdentityObservation::vjp(ConstVectorRef, ConstVectorRef w, Vector& out) const { out = w; }

ComponentObservation::ComponentObservation(Index state_dim, std::vector<Index> components)
    : state_dim_(state_dim), components_(std::move(components)) {
  if (components_.empty()) throw DimensionError("component observation needs at least one index");
  for (const Index c : components_) {
    if (c < 0 || c >= state_dim_) {
      throw DimensionError("observed component " + std::to_string(c) + " is outside the state");
    }
  }
}

void ComponentObservation::eval(ConstVectorRef x, VectorRef y) const {
  for (std::size_t k = 0; k < components_.size(); ++k) y(static_cast<Index>(k)) = x(components_[k]);
}

Matrix ComponentObservation::jac(ConstVectorRef) const {
  Matrix h = Matrix::Zero(out_dim(), state_dim_);
  for (std::size_t k = 0; k < components_.size(); ++k) h(static_cast<Index>(k), components_[k]) = 1.0;
  return h;
}

void ComponentObservation::vjp(ConstVectorRef, ConstVectorRef w, Vector& out) const {
  out = Vector::Zero(state_dim_);
  for (std::size_t k = 0; k < components_.size(); ++k) out(components_[k]) += w(static_cast<Index>(k));
}

}  // namespace odefit
