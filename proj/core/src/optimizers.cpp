#include "odefit/optimizers.hpp"

#include <cmath>
#include <string>

#include "odefit/errors.hpp"

namespace odefit {
namespace {

void check_grad(ConstVectorRef x, ConstVectorRef grad) {
  if (x.size() != grad.size()) {
    throw DimensionError("optimizer: iterate has " + std::to_string(x.size()) +
                         " entries but gradient has " + std::to_string(grad.size()));
  }
  for (Index k = 0; k < grad.size(); ++k) {
    if (!std::isfinite(grad(k))) {
      throw NumericalError("optimizer: non-finite gradient entry " + std::to_string(k));
    }
  }
}

}  // namespace

Vector sgd_step(const SgdState& state, ConstVectorRef x, ConstVectorRef grad) {
  check_grad(x, grad);
  return x - state.lr * grad;
}

Vector adam_step(AdamState& state, ConstVectorRef x, ConstVectorRef grad) {
  check_grad(x, grad);
  if (state.m.size() != x.size()) state.m = Vector::Zero(x.size());
  if (state.v.size() != x.size()) state.v = Vector::Zero(x.size());
  state.t += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  const Vector m_hat = state.m / bias1;
  const Vector v_hat = state.v / bias2;
  return x - (state.lr * m_hat.array() / (v_hat.array().sqrt() + state.eps)).matrix();
}

void OptimizerConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive");
  if (kind == OptimizerKind::adam) {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw ConfigError("Adam decay rates must lie in [0, 1)");
    }
    if (!(eps > 0.0)) throw ConfigError("Adam epsilon must be positive");
  }
}

Optimizer::Optimizer(const OptimizerConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.kind == OptimizerKind::sgd) {
    state_ = SgdState{cfg_.lr};
  } else {
    state_ = AdamState{cfg_.lr, cfg_.beta1, cfg_.beta2, cfg_.eps, {}, {}, 0};
  }
}

void Optimizer::step(Eigen::Ref<Vector> x, ConstVectorRef grad) {
  if (auto* sgd = std::get_if<SgdState>(&state_)) {
    x = sgd_step(*sgd, x, grad);
  } else {
    x = adam_step(std::get<AdamState>(state_), x, grad);
  }
}

}  // namespace odefit
