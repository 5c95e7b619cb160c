#pragma once

// Reference implementations used only by the tests. They are written
// straight from the model definitions with no shared code paths, trading
// speed for obviousness.

#include <cmath>
#include <functional>
#include <random>

#include <odefit/types.hpp>
#include <odefit/vector_field.hpp>

namespace oracle {

using odefit::Index;
using odefit::Matrix;
using odefit::StateMatrix;
using odefit::Vector;

// Values computed offline in 40-digit arithmetic.
namespace frozen {

// Cucker-Smale, N = 3, theta = [0.7, 1.3, 0.9, 2.0, 0.5],
// x = (0.3,-0.2), (-0.7,0.4), (1.1,0.9); v = (0.1,0.05), (-0.2,0.3), (0,-0.15).
inline const double cs_theta[5] = {0.7, 1.3, 0.9, 2.0, 0.5};
inline const double cs_state[12] = {0.3, -0.2, -0.7, 0.4, 1.1, 0.9,
                                    0.1, 0.05, -0.2, 0.3, 0.0, -0.15};
inline const double cs_rhs[12] = {0.1,
                                  0.05,
                                  -0.2,
                                  0.3,
                                  0.0,
                                  -0.15,
                                  -0.083282750655738295917,
                                  0.10272661384440594525,
                                  0.20013417658657771651,
                                  -0.11140789300294056265,
                                  -0.11685142593083942059,
                                  0.0086812791585346174023};

// Collocation residual of interval [0, 0.1] on exact samples of e^{-t}.
inline constexpr double hs_residual_beta_sixth = 0.000026447264424715318467;
inline constexpr double hs_residual_beta_eighth = 1.3213879148533234947e-8;

}  // namespace frozen

/// Planar Cucker-Smale right-hand side by a plain double loop over ordered pairs.
inline Vector cs_rhs(const Vector& s, const Vector& theta) {
  const Index n = s.size() / 4;
  const double gamma = theta(0), ca = theta(1), cr = theta(2), la = theta(3), lr = theta(4);
  Vector out = Vector::Zero(s.size());
  for (Index i = 0; i < n; ++i) {
    out(2 * i) = s(2 * n + 2 * i);
    out(2 * i + 1) = s(2 * n + 2 * i + 1);
  }
  for (Index i = 0; i < n; ++i) {
    double ax = 0.0, ay = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = s(2 * i) - s(2 * j);
      const double dy = s(2 * i + 1) - s(2 * j + 1);
      const double r = std::sqrt(dx * dx + dy * dy);
      const double h = std::pow(1.0 + r * r, -gamma);
      const double up = ca / la * std::exp(-r / la) - cr / lr * std::exp(-r / lr);
      ax += h * (s(2 * n + 2 * j) - s(2 * n + 2 * i)) - up * dx / r;
      ay += h * (s(2 * n + 2 * j + 1) - s(2 * n + 2 * i + 1)) - up * dy / r;
    }
    out(2 * n + 2 * i) = ax / static_cast<double>(n);
    out(2 * n + 2 * i + 1) = ay / static_cast<double>(n);
  }
  return out;
}

/// Hermite-Simpson residual of every interval, evaluated point by point.
inline StateMatrix hs_residual(const odefit::VectorField& f, const StateMatrix& x,
                               const Vector& theta, double h, double beta) {
  StateMatrix r(x.rows() - 1, x.cols());
  for (Index i = 0; i + 1 < x.rows(); ++i) {
    const Vector a = x.row(i).transpose();
    const Vector b = x.row(i + 1).transpose();
    const Vector fa = f(a, theta);
    const Vector fb = f(b, theta);
    const Vector c = 0.5 * (a + b) + beta * h * (fa - fb);
    const Vector fc = f(c, theta);
    r.row(i) = (a - b + h / 6.0 * (fa + fb + 4.0 * fc)).transpose();
  }
  return r;
}

/// Central-difference gradient of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& fun, const Vector& at,
                          double step) {
  Vector g(at.size());
  Vector p = at;
  for (Index k = 0; k < at.size(); ++k) {
    const double orig = p(k);
    p(k) = orig + step;
    const double up = fun(p);
    p(k) = orig - step;
    const double down = fun(p);
    p(k) = orig;
    g(k) = (up - down) / (2.0 * step);
  }
  return g;
}

/// |a - b| / |b|, with b the reference.
inline double rel_err(const Vector& a, const Vector& b) {
  const double d = (a - b).norm();
  return d == 0.0 ? 0.0 : d / b.norm();
}

/// Random planar swarm with positions in [-2, 2]^2, velocities in [-0.5, 0.5]^2
/// and every pair at least `min_sep` apart.
inline Vector random_swarm(std::mt19937_64& rng, Index n, double min_sep = 0.2) {
  std::uniform_real_distribution<double> pos(-2.0, 2.0), vel(-0.5, 0.5);
  Vector s(4 * n);
  for (Index i = 0; i < n; ++i) {
    for (;;) {
      s(2 * i) = pos(rng);
      s(2 * i + 1) = pos(rng);
      bool ok = true;
      for (Index j = 0; j < i && ok; ++j) {
        ok = std::hypot(s(2 * i) - s(2 * j), s(2 * i + 1) - s(2 * j + 1)) >= min_sep;
      }
      if (ok) break;
    }
  }
  for (Index k = 2 * n; k < 4 * n; ++k) s(k) = vel(rng);
  return s;
}

/// Parameters inside the harness sampling box.
inline Vector random_cs_theta(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector t(5);
  t << 0.1 + 1.4 * u(rng), 0.5 + 1.5 * u(rng), 0.5 + 1.5 * u(rng), 1.0 + 2.0 * u(rng),
      0.3 + 0.7 * u(rng);
  return t;
}

}  // namespace oracle
