#include "odefit/collocation.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "odefit/errors.hpp"
#include "parallel.hpp"

namespace odefit {
namespace {

[[noreturn]] void rethrow_at(const char* where, Index index, const EvaluationError& e) {
  throw EvaluationError(std::string(where) + " " + std::to_string(index) + ": " + e.what());
}

}  // namespace

void ResidualConfig::validate() const {
  if (!(midpoint_coeff > 0.0) || !std::isfinite(midpoint_coeff)) {
    throw ConfigError("midpoint coefficient must be positive");
  }
  if (!(residual_weight > 0.0) || !std::isfinite(residual_weight)) {
    throw ConfigError("residual weight must be positive");
  }
  if (threads < 1) throw ConfigError("thread count must be at least 1");
}

HermiteSimpson::HermiteSimpson(const VectorField& field, const ObservationMap& obs,
                               TimeGrid grid, ResidualConfig cfg)
    : field_(field), obs_(obs), grid_(grid), cfg_(cfg) {
  grid_.validate();
  cfg_.validate();
  if (obs_.in_dim() != field_.state_dim()) {
    throw DimensionError("observation map input size differs from the state size");
  }
}

Window HermiteSimpson::resolve(Window window) const {
  const Index nt = grid_.num_intervals;
  if (window.count < 0) window.count = nt - window.first;
  if (window.first < 0 || window.count < 1 || window.first + window.count > nt) {
    throw std::invalid_argument("collocation window [" + std::to_string(window.first) + ", +" +
                                std::to_string(window.count) + ") lies outside " +
                                std::to_string(nt) + " intervals");
  }
  return window;
}

void HermiteSimpson::check_shapes(const StateMatrix& x, const StateMatrix* targets) const {
  if (x.rows() != grid_.num_samples() || x.cols() != field_.state_dim()) {
    throw DimensionError("collocation states must be " + std::to_string(grid_.num_samples()) +
                         " x " + std::to_string(field_.state_dim()));
  }
  if (targets && (targets->rows() != grid_.num_samples() || targets->cols() != obs_.out_dim())) {
    throw DimensionError("collocation targets must be " + std::to_string(grid_.num_samples()) +
                         " x " + std::to_string(obs_.out_dim()));
  }
}

double HermiteSimpson::data_loss(const StateMatrix& x, const StateMatrix& targets, Window window,
                                 StateMatrix* grad) const {
  check_shapes(x, &targets);
  window = resolve(window);
  const Index last = window.first + window.count;
  if (grad) grad->setZero(x.rows(), x.cols());
  double total = 0.0;
  Vector y(obs_.out_dim());
  Vector back;
  for (Index k = window.first; k <= last; ++k) {
    const auto xk = x.row(k).transpose();
    obs_.eval(xk, y);
    const Vector diff = y - targets.row(k).transpose();
    total += diff.squaredNorm();
    if (grad) {
      obs_.vjp(xk, 2.0 * diff, back);
      grad->row(k) = back.transpose();
    }
  }
  return total;
}

CollocationEval HermiteSimpson::evaluate(const StateMatrix& x, ConstVectorRef theta,
                                         const StateMatrix& targets, const MultiplierState* mult,
                                         bool want_grad_x, bool want_grad_theta,
                                         Window window) const {
  check_shapes(x, &targets);
  window = resolve(window);
  if (theta.size() != field_.param_dim()) {
    throw DimensionError("collocation parameters must have " +
                         std::to_string(field_.param_dim()) + " entries");
  }
  const Index n = field_.state_dim();
  const Index p = field_.param_dim();
  const Index first = window.first;
  const Index last_interval = window.first + window.count;  // exclusive
  const double h = grid_.h;
  const double beta_h = cfg_.midpoint_coeff * h;
  const double rho = mult ? mult->rho : cfg_.residual_weight;
  if (mult && (mult->lambda.rows() != grid_.num_intervals || mult->lambda.cols() != n)) {
    throw DimensionError("multipliers must be N_t x n");
  }
  const bool want_grad = want_grad_x || want_grad_theta;
  const Vector params = theta;
  const int threads = cfg_.threads;

  CollocationEval out;
  out.residual = StateMatrix::Zero(grid_.num_intervals, n);

  // Node values (and linearizations when gradients are needed).
  StateMatrix f_nodes(grid_.num_samples(), n);
  std::vector<std::unique_ptr<PointLinearization>> node_lin(
      want_grad ? static_cast<std::size_t>(grid_.num_samples()) : 0);
  detail::parallel_for(first, last_interval + 1, threads, [&](Index k) {
    try {
      if (want_grad) {
        auto& lin = node_lin[static_cast<std::size_t>(k)];
        lin = field_.linearize(x.row(k).transpose(), params);
        f_nodes.row(k) = lin->value().transpose();
      } else {
        Vector fk(n);
        field_.eval(x.row(k).transpose(), params, fk);
        f_nodes.row(k) = fk.transpose();
      }
    } catch (const EvaluationError& e) {
      rethrow_at("node", k, e);
    }
  });

  // Interval residuals and midpoint products.
  StateMatrix weights(want_grad ? grid_.num_intervals : 0, n);
  StateMatrix mid_back(want_grad ? grid_.num_intervals : 0, n);
  Matrix mid_theta(want_grad_theta ? p : 0, want_grad_theta ? grid_.num_intervals : 0);
  detail::parallel_for(first, last_interval, threads, [&](Index i) {
    try {
      const Vector xi = x.row(i).transpose();
      const Vector xj = x.row(i + 1).transpose();
      const Vector fi = f_nodes.row(i).transpose();
      const Vector fj = f_nodes.row(i + 1).transpose();
      const Vector xc = 0.5 * (xi + xj) + beta_h * (fi - fj);
      Vector fc(n);
      std::unique_ptr<PointLinearization> lin;
      if (want_grad) {
        lin = field_.linearize(xc, params);
        fc = lin->value();
      } else {
        field_.eval(xc, params, fc);
      }
      const Vector r = xi - xj + (h / 6.0) * (fi + fj + 4.0 * fc);
      out.residual.row(i) = r.transpose();
      if (want_grad) {
        Vector w = rho * r;
        if (mult) w += mult->lambda.row(i).transpose();
        weights.row(i) = w.transpose();
        Vector back;
        Vector back_theta;
        lin->vjp(w, &back, want_grad_theta ? &back_theta : nullptr);
        mid_back.row(i) = back.transpose();
        if (want_grad_theta) mid_theta.col(i) = back_theta;
      }
    } catch (const EvaluationError& e) {
      rethrow_at("interval", i, e);
    }
  });

  // Node products with a_k.
  StateMatrix node_back(want_grad_x ? grid_.num_samples() : 0, n);
  Matrix node_theta(want_grad_theta ? p : 0, want_grad_theta ? grid_.num_samples() : 0);
  if (want_grad) {
    detail::parallel_for(first, last_interval + 1, threads, [&](Index k) {
      Vector a = Vector::Zero(n);
      if (k < last_interval) {
        a += weights.row(k).transpose() + 4.0 * beta_h * mid_back.row(k).transpose();
      }
      if (k > first) {
        a += weights.row(k - 1).transpose() - 4.0 * beta_h * mid_back.row(k - 1).transpose();
      }
      Vector back;
      Vector back_theta;
      node_lin[static_cast<std::size_t>(k)]->vjp(a, want_grad_x ? &back : nullptr,
                                                 want_grad_theta ? &back_theta : nullptr);
      if (want_grad_x) node_back.row(k) = back.transpose();
      if (want_grad_theta) node_theta.col(k) = back_theta;
    });
  }

  // Ordered reductions.
  StateMatrix data_grad;
  out.data_loss = data_loss(x, targets, window, want_grad_x ? &data_grad : nullptr);
  double penalty = 0.0;
  for (Index i = first; i < last_interval; ++i) {
    const auto r = out.residual.row(i);
    const double sq = r.squaredNorm();
    out.residual_sq += sq;
    penalty += 0.5 * rho * sq;
    if (mult) penalty += mult->lambda.row(i).dot(r);
  }
  out.value = out.data_loss + penalty;

  if (want_grad_x) {
    out.grad_x = std::move(data_grad);
    for (Index k = first; k <= last_interval; ++k) {
      auto g = out.grad_x.row(k);
      g += (h / 6.0) * node_back.row(k);
      if (k < last_interval) g += weights.row(k) + (h / 3.0) * mid_back.row(k);
      if (k > first) g += -weights.row(k - 1) + (h / 3.0) * mid_back.row(k - 1);
    }
  }
  if (want_grad_theta) {
    Vector node_sum = Vector::Zero(p);
    for (Index k = first; k <= last_interval; ++k) node_sum += node_theta.col(k);
    Vector mid_sum = Vector::Zero(p);
    for (Index i = first; i < last_interval; ++i) mid_sum += mid_theta.col(i);
    out.grad_theta = (h / 6.0) * (node_sum + 4.0 * mid_sum);
  }
  return out;
}

StateMatrix HermiteSimpson::residual(const StateMatrix& x, ConstVectorRef theta,
                                     Window window) const {
  check_shapes(x, nullptr);
  // Targets only feed the data term, which residual() discards.
  const StateMatrix dummy = StateMatrix::Zero(grid_.num_samples(), obs_.out_dim());
  return evaluate(x, theta, dummy, nullptr, false, false, window).residual;
}

double HermiteSimpson::loss(const StateMatrix& x, ConstVectorRef theta, const StateMatrix& targets,
                            Window window) const {
  return evaluate(x, theta, targets, nullptr, false, false, window).value;
}

StateMatrix HermiteSimpson::grad_x(const StateMatrix& x, ConstVectorRef theta,
                                   const StateMatrix& targets, Window window) const {
  return evaluate(x, theta, targets, nullptr, true, false, window).grad_x;
}

Vector HermiteSimpson::grad_theta(const StateMatrix& x, ConstVectorRef theta,
                                  const StateMatrix& targets, Window window) const {
  return evaluate(x, theta, targets, nullptr, false, true, window).grad_theta;
}

CollocationEval HermiteSimpson::auglag(const StateMatrix& x, ConstVectorRef theta,
                                       const MultiplierState& mult, const StateMatrix& targets,
                                       Window window) const {
  return evaluate(x, theta, targets, &mult, true, true, window);
}

}  // namespace odefit
