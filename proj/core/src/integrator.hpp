#pragma once

// Grid-sampling explicit Runge-Kutta integration shared by the plain and the
// sensitivity-augmented solvers. Right-hand sides are callables
// rhs(const Vector& x, Vector& dx).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "odefit/errors.hpp"
#include "odefit/ode_solver.hpp"

namespace odefit::detail {

struct Dopri5Tableau {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
};

inline double weighted_rms(const Vector& err, const Vector& x, const Vector& x_new,
                           const SolverConfig& cfg) {
  double acc = 0.0;
  for (Index i = 0; i < err.size(); ++i) {
    const double sc = cfg.atol + cfg.rtol * std::max(std::abs(x(i)), std::abs(x_new(i)));
    const double e = err(i) / sc;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(std::max<Index>(err.size(), 1)));
}

/// PI step-size controller in the form used by classical DOPRI5 codes.
class StepController {
 public:
  explicit StepController(const SolverConfig& cfg) : cfg_(cfg) {}

  /// Returns the next step for an attempted step h with weighted error `err`.
  double propose(double h, double err, bool accepted) {
    constexpr double beta = 0.04;
    constexpr double expo1 = 0.2 - beta * 0.75;
    const double grow_limit = 1.0 / cfg_.max_scale;
    const double shrink_limit = 1.0 / cfg_.min_scale;
    const double fac11 = std::pow(err, expo1);
    if (accepted) {
      double fac = fac11 / std::pow(err_old_, beta);
      fac = std::max(grow_limit, std::min(shrink_limit, fac / cfg_.safety));
      double h_new = h / fac;
      if (last_rejected_) h_new = std::min(h_new, h);
      err_old_ = std::max(err, 1e-4);
      last_rejected_ = false;
      return h_new;
    }
    last_rejected_ = true;
    return h / std::min(shrink_limit, fac11 / cfg_.safety);
  }

 private:
  const SolverConfig& cfg_;
  double err_old_ = 1e-4;
  bool last_rejected_ = false;
};

template <class Rhs>
struct Dopri5Stages {
  Vector k2, k3, k4, k5, k6, k7, tmp, err;

  /// Fills x_new, k7 = f(x_new) and err from k1 = f(x).
  void step(Rhs& rhs, const Vector& x, const Vector& k1, double h, Vector& x_new) {
    using T = Dopri5Tableau;
    if (k2.size() != x.size()) {
      for (Vector* v : {&k2, &k3, &k4, &k5, &k6, &k7}) v->resize(x.size());
    }
    tmp = x + h * (T::a21 * k1);
    rhs(tmp, k2);
    tmp = x + h * (T::a31 * k1 + T::a32 * k2);
    rhs(tmp, k3);
    tmp = x + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
    rhs(tmp, k4);
    tmp = x + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
    rhs(tmp, k5);
    tmp = x + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
    rhs(tmp, k6);
    x_new = x + h * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
    rhs(x_new, k7);
    err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
  }
};

template <class Rhs>
double initial_step(Rhs& rhs, const Vector& x, const Vector& f0, const SolverConfig& cfg,
                    double span) {
  const Vector sc = (cfg.atol + cfg.rtol * x.array().abs()).matrix();
  const double n = static_cast<double>(std::max<Index>(x.size(), 1));
  const double d0 = std::sqrt((x.array() / sc.array()).square().sum() / n);
  const double d1 = std::sqrt((f0.array() / sc.array()).square().sum() / n);
  const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  Vector x1 = x + h0 * f0;
  Vector f1(x.size());
  rhs(x1, f1);
  const double d2 = std::sqrt(((f1 - f0).array() / sc.array()).square().sum() / n) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, span});
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Integrates from x0 over `grid`, calling sample(i, x) at every grid time,
/// including i = 0. `sensitivity` only affects error classification.
template <class Rhs, class Sample>
void integrate_on_grid(Rhs& rhs, Vector x, const TimeGrid& grid, const SolverConfig& cfg,
                       bool sensitivity, Sample&& sample) {
  grid.validate();
  cfg.validate();
  const Index dim = x.size();
  if (!x.allFinite()) {
    throw SolverError(SolverError::Kind::instability, grid.t0, sensitivity,
                      "initial state is not finite");
  }
  sample(Index{0}, x);

  const auto fail = [&](SolverError::Kind kind, double t, const std::string& why) {
    throw SolverError(kind, t, sensitivity,
                      std::string(sensitivity ? "sensitivity solve: " : "solve: ") + why +
                          " at t = " + std::to_string(t));
  };

  if (cfg.method == SolverMethod::rk4) {
    Vector k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    const double hs = grid.h / static_cast<double>(cfg.rk4_substeps);
    for (Index i = 1; i <= grid.num_intervals; ++i) {
      for (int s = 0; s < cfg.rk4_substeps; ++s) {
        rhs(x, k1);
        tmp = x + (0.5 * hs) * k1;
        rhs(tmp, k2);
        tmp = x + (0.5 * hs) * k2;
        rhs(tmp, k3);
        tmp = x + hs * k3;
        rhs(tmp, k4);
        x += (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      if (!x.allFinite()) fail(SolverError::Kind::instability, grid.time(i), "non-finite state");
      sample(i, x);
    }
    return;
  }

  Dopri5Stages<Rhs> stages;
  StepController control(cfg);
  Vector k1(dim), x_new(dim);
  rhs(x, k1);
  double t = grid.t0;
  double h = cfg.initial_step ? *cfg.initial_step
                              : initial_step(rhs, x, k1, cfg, grid.final_time() - grid.t0);
  long steps = 0;
  for (Index i = 1; i <= grid.num_intervals; ++i) {
    const double target = grid.time(i);
    while (t < target) {
      const double remaining = target - t;
      const bool clipped = h >= remaining || remaining - h <= 1e-12 * std::abs(target);
      const double h_use = clipped ? remaining : h;
      if (++steps > cfg.max_steps) fail(SolverError::Kind::divergence, t, "step budget exhausted");
      const double h_min = 16.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(t), 1.0);
      if (h_use < h_min && !clipped) fail(SolverError::Kind::step_underflow, t, "step underflow");

      stages.step(rhs, x, k1, h_use, x_new);
      const double err = weighted_rms(stages.err, x, x_new, cfg);
      if (!std::isfinite(err) || !x_new.allFinite() || !stages.k7.allFinite()) {
        h = h_use * cfg.min_scale;
        if (h < h_min) fail(SolverError::Kind::instability, t, "non-finite state");
        continue;
      }
      const bool accepted = err <= 1.0;
      const double h_next = control.propose(h_use, err, accepted);
      if (accepted) {
        t = clipped ? target : t + h_use;
        x.swap(x_new);
        k1.swap(stages.k7);
      }
      h = h_next;
    }
    sample(i, x);
  }
}

}  // namespace odefit::detail
