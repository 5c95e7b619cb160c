#pragma once

#include <cstdint>
#include <variant>

#include "odefit/types.hpp"

namespace odefit {

struct SgdState {
  double lr = 0.01;
};

struct AdamState {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Vector m;  ///< first moment, zero-initialized on first use
  Vector v;  ///< second moment, zero-initialized on first use
  std::int64_t t = 0;
};

/// x - lr * grad. Throws NumericalError on non-finite gradient entries.
Vector sgd_step(const SgdState& state, ConstVectorRef x, ConstVectorRef grad);

/// Bias-corrected Adam update; advances `state` (moments and step counter)
/// and returns the new iterate.
Vector adam_step(AdamState& state, ConstVectorRef x, ConstVectorRef grad);

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
  bool operator==(const OptimizerConfig&) const = default;
};

/// Owns the mutable state of one update rule for one flat block.
class Optimizer {
 public:
  explicit Optimizer(const OptimizerConfig& cfg);

  /// In-place update of x.
  void step(Eigen::Ref<Vector> x, ConstVectorRef grad);
  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  std::variant<SgdState, AdamState> state_;
};

}  // namespace odefit
