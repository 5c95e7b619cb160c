#include "odefit/vector_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "odefit/errors.hpp"

namespace odefit {
namespace {

class DenseLinearization final : public PointLinearization {
 public:
  DenseLinearization(const VectorField& field, ConstVectorRef x, ConstVectorRef theta)
      : jx_(field.jac_state(x, theta)), jtheta_(field.jac_params(x, theta)) {
    value_.resize(field.state_dim());
    field.eval(x, theta, value_);
  }

  void vjp(ConstVectorRef w, Vector* wx, Vector* wtheta) const override {
    if (wx) *wx = jx_.transpose() * w;
    if (wtheta) *wtheta = jtheta_.transpose() * w;
  }

 private:
  Matrix jx_;
  Matrix jtheta_;
};

class LogLinearization final : public PointLinearization {
 public:
  LogLinearization(std::unique_ptr<PointLinearization> inner, Vector theta)
      : inner_(std::move(inner)), theta_(std::move(theta)) {
    value_ = inner_->value();
  }

  void vjp(ConstVectorRef w, Vector* wx, Vector* wtheta) const override {
    inner_->vjp(w, wx, wtheta);
    if (wtheta) *wtheta = wtheta->cwiseProduct(theta_);
  }

 private:
  std::unique_ptr<PointLinearization> inner_;
  Vector theta_;
};

Vector eval_checked(const VectorField& field, ConstVectorRef x, ConstVectorRef theta) {
  Vector out = field(x, theta);
  if (!out.allFinite()) {
    throw EvaluationError("vector field returned a non-finite value during finite differencing");
  }
  return out;
}

// Step actually taken after rounding x + step, so that linear maps difference exactly.
double exact_step(double base, double step) {
  volatile double plus = base + step;
  return plus - base;
}

double max_rel_error(const Matrix& analytic, const Matrix& fd) {
  double worst = 0.0;
  for (Index j = 0; j < fd.cols(); ++j) {
    for (Index i = 0; i < fd.rows(); ++i) {
      const double err = std::abs(analytic(i, j) - fd(i, j)) / std::max(1.0, std::abs(fd(i, j)));
      if (!std::isfinite(err)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace

void VectorField::sensitivity_rhs(ConstVectorRef x, ConstVectorRef theta, ConstMatrixRef sens,
                                  VectorRef dx, MatrixRef dsens) const {
  eval(x, theta, dx);
  dsens.noalias() = jac_state(x, theta) * sens;
  dsens += jac_params(x, theta);
}

std::unique_ptr<PointLinearization> VectorField::linearize(ConstVectorRef x,
                                                           ConstVectorRef theta) const {
  return std::make_unique<DenseLinearization>(*this, x, theta);
}

Vector VectorField::operator()(ConstVectorRef x, ConstVectorRef theta) const {
  Vector out(state_dim());
  eval(x, theta, out);
  return out;
}

void VectorField::check_dims(ConstVectorRef x, ConstVectorRef theta) const {
  if (x.size() != state_dim() || theta.size() != param_dim()) {
    throw DimensionError("vector field expects state of size " + std::to_string(state_dim()) +
                         " and parameters of size " + std::to_string(param_dim()) + ", got " +
                         std::to_string(x.size()) + " and " + std::to_string(theta.size()));
  }
}

void LogParameterized::eval(ConstVectorRef x, ConstVectorRef phi, VectorRef out) const {
  inner_.eval(x, to_natural(phi), out);
}

Matrix LogParameterized::jac_state(ConstVectorRef x, ConstVectorRef phi) const {
  return inner_.jac_state(x, to_natural(phi));
}

Matrix LogParameterized::jac_params(ConstVectorRef x, ConstVectorRef phi) const {
  const Vector theta = to_natural(phi);
  return inner_.jac_params(x, theta) * theta.asDiagonal();
}

std::unique_ptr<PointLinearization> LogParameterized::linearize(ConstVectorRef x,
                                                                ConstVectorRef phi) const {
  Vector theta = to_natural(phi);
  auto inner = inner_.linearize(x, theta);
  return std::make_unique<LogLinearization>(std::move(inner), std::move(theta));
}

Matrix fd_jac_state(const VectorField& field, ConstVectorRef point, ConstVectorRef params,
                    double step) {
  field.check_dims(point, params);
  const Index n = field.state_dim();
  Matrix jac(n, n);
  Vector x = point;
  for (Index k = 0; k < n; ++k) {
    const double dk = exact_step(point(k), step);
    x(k) = point(k) + dk;
    const Vector fp = eval_checked(field, x, params);
    x(k) = point(k) - dk;
    const Vector fm = eval_checked(field, x, params);
    x(k) = point(k);
    jac.col(k) = (fp - fm) / (2.0 * dk);
  }
  return jac;
}

Matrix fd_jac_params(const VectorField& field, ConstVectorRef point, ConstVectorRef params,
                     double step) {
  field.check_dims(point, params);
  const Index p = field.param_dim();
  Matrix jac(field.state_dim(), p);
  Vector theta = params;
  for (Index k = 0; k < p; ++k) {
    const double dk = exact_step(params(k), step);
    theta(k) = params(k) + dk;
    const Vector fp = eval_checked(field, point, theta);
    theta(k) = params(k) - dk;
    const Vector fm = eval_checked(field, point, theta);
    theta(k) = params(k);
    jac.col(k) = (fp - fm) / (2.0 * dk);
  }
  return jac;
}

double fd_check_jacobians(const VectorField& field, ConstVectorRef point, ConstVectorRef params,
                          double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const Matrix jx = field.jac_state(point, params);
  const Matrix jp = field.jac_params(point, params);
  if (!jx.allFinite() || !jp.allFinite()) {
    throw EvaluationError("analytic Jacobian is non-finite");
  }
  return std::max(max_rel_error(jx, fd_jac_state(field, point, params, step)),
                  max_rel_error(jp, fd_jac_params(field, point, params, step)));
}

}  // namespace odefit
