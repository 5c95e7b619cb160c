#include "odefit/cucker_smale.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "odefit/errors.hpp"

namespace odefit {
namespace {

// Parameter combinations shared by every pair of one evaluation point.
struct PotentialConsts {
  explicit PotentialConsts(const CSParams& p)
      : gamma(p.gamma),
        l_a(p.l_a),
        l_r(p.l_r),
        inv_la(1.0 / p.l_a),
        inv_lr(1.0 / p.l_r),
        ca_la(p.c_a / p.l_a),
        cr_lr(p.c_r / p.l_r),
        ca_la2(p.c_a / (p.l_a * p.l_a)),
        cr_lr2(p.c_r / (p.l_r * p.l_r)),
        ca_la3(ca_la2 / p.l_a),
        cr_lr3(cr_lr2 / p.l_r) {}
  double gamma, l_a, l_r;
  double inv_la, inv_lr;
  double ca_la, cr_lr;    // c / l
  double ca_la2, cr_lr2;  // c / l^2
  double ca_la3, cr_lr3;  // c / l^3
};

// Quantities of one unordered pair (i < j), d = x_i - x_j.
struct PairTerms {
  Index i;
  Index j;
  double dx;
  double dy;
  double r;
  double log_term;  // log(1 + r^2)
  double rate;      // H(r)
  double exp_a;     // exp(-r / l_a)
  double exp_r;     // exp(-r / l_r)
};

// Derived per-pair coefficients used by the value and by every derivative.
struct PairCoeffs {
  double rate_slope;  // H'(r) / r
  double g;           // U'(r) / r
  double q;           // (U''(r) - g) / r^2
};

PairCoeffs coeffs(const PairTerms& t, const PotentialConsts& k) {
  const double inv_r = 1.0 / t.r;
  const double du = k.ca_la * t.exp_a - k.cr_lr * t.exp_r;
  const double d2u = -k.ca_la2 * t.exp_a + k.cr_lr2 * t.exp_r;
  const double g = du * inv_r;
  return {-2.0 * k.gamma * t.rate / (1.0 + t.r * t.r), g, (d2u - g) * inv_r * inv_r};
}

// dU'/d(c_a, c_r, l_a, l_r) at the pair distance.
std::array<double, 4> potential_partials(const PairTerms& t, const PotentialConsts& k) {
  return {t.exp_a * k.inv_la, -t.exp_r * k.inv_lr, k.ca_la3 * t.exp_a * (t.r - k.l_a),
          -k.cr_lr3 * t.exp_r * (t.r - k.l_r)};
}

// d(vdot_i)/d(theta) contributed by pair (i, j); the j-row receives the negation.
// Columns follow CSParams::names.
std::array<std::array<double, 2>, 5> param_partials(const PairTerms& t, const PotentialConsts& k,
                                                    double dvx, double dvy) {
  const double dgamma = -t.rate * t.log_term;
  const double inv_r = 1.0 / t.r;
  const auto pot = potential_partials(t, k);
  std::array<std::array<double, 2>, 5> out{};
  out[0] = {dgamma * dvx, dgamma * dvy};
  for (int m = 0; m < 4; ++m) out[m + 1] = {-pot[m] * inv_r * t.dx, -pot[m] * inv_r * t.dy};
  return out;
}

void check_params(const CSParams& p) {
  if (!(p.l_a > 0.0) || !(p.l_r > 0.0)) {
    throw EvaluationError("Cucker-Smale potential lengths must be positive (l_a = " +
                          std::to_string(p.l_a) + ", l_r = " + std::to_string(p.l_r) + ")");
  }
}

// Visits every unordered pair with its terms. Coincident pairs either raise or
// are skipped according to `policy`.
template <class Visit>
void for_each_pair(ConstVectorRef x, Index n, const PotentialConsts& k, CoincidentPolicy policy,
                   Visit&& visit) {
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      PairTerms t;
      t.i = i;
      t.j = j;
      t.dx = x(2 * i) - x(2 * j);
      t.dy = x(2 * i + 1) - x(2 * j + 1);
      const double r2 = t.dx * t.dx + t.dy * t.dy;
      if (r2 == 0.0) {
        if (policy == CoincidentPolicy::skip_pair) continue;
        throw EvaluationError("particles " + std::to_string(i) + " and " + std::to_string(j) +
                              " coincide");
      }
      t.r = std::sqrt(r2);
      t.log_term = std::log1p(r2);
      t.rate = std::exp(-k.gamma * t.log_term);
      t.exp_a = std::exp(-t.r * k.inv_la);
      t.exp_r = std::exp(-t.r * k.inv_lr);
      visit(t);
    }
  }
}

// Stores, per unordered pair in (i, j) loop order, the coefficients every
// transposed product needs. Pair differences are re-read from the stored point.
class CSLinearization final : public PointLinearization {
 public:
  CSLinearization(Index n, ConstVectorRef x, const CSParams& params, CoincidentPolicy policy)
      : n_(n), x_(x), consts_(params) {
    value_ = Vector::Zero(4 * n);
    value_.head(2 * n) = x.tail(2 * n);
    // Zero coefficients make a skipped coincident pair contribute nothing.
    pairs_.resize(static_cast<std::size_t>(n * (n - 1) / 2));
    const PotentialConsts& k = consts_;
    const double inv_n = 1.0 / static_cast<double>(n);
    const auto v = x.tail(2 * n);
    for_each_pair(x, n, k, policy, [&](const PairTerms& t) {
      const double inv_r = 1.0 / t.r;
      const double du = k.ca_la * t.exp_a - k.cr_lr * t.exp_r;
      const double d2u = -k.ca_la2 * t.exp_a + k.cr_lr2 * t.exp_r;
      const double g = du * inv_r;
      const double ax = t.rate * (v(2 * t.j) - v(2 * t.i)) - g * t.dx;
      const double ay = t.rate * (v(2 * t.j + 1) - v(2 * t.i + 1)) - g * t.dy;
      value_(2 * n + 2 * t.i) += inv_n * ax;
      value_(2 * n + 2 * t.i + 1) += inv_n * ay;
      value_(2 * n + 2 * t.j) -= inv_n * ax;
      value_(2 * n + 2 * t.j + 1) -= inv_n * ay;

      Pair& pr = pairs_[static_cast<std::size_t>(pair_index(t.i, t.j))];
      pr.rate = t.rate;
      pr.rate_slope = -2.0 * k.gamma * t.rate / (1.0 + t.r * t.r);
      pr.g = g;
      pr.q = (d2u - g) * inv_r * inv_r;
      pr.dgamma = -t.rate * t.log_term;
      pr.exp_a_r = t.exp_a * inv_r;
      pr.exp_r_r = t.exp_r * inv_r;
      pr.r = t.r;
    });
  }

  void vjp(ConstVectorRef w, Vector* wx, Vector* wtheta) const override {
    const Index n = n_;
    const double inv_n = 1.0 / static_cast<double>(n);
    if (wx) {
      wx->setZero(4 * n);
      wx->tail(2 * n) = w.head(2 * n);
    }
    double acc_gamma = 0.0;
    double acc_a = 0.0;   // sum exp_a / r * s_pos
    double acc_r = 0.0;   // sum exp_r / r * s_pos
    double acc_ra = 0.0;  // sum exp_a / r * (r - l_a) * s_pos
    double acc_rr = 0.0;  // sum exp_r / r * (r - l_r) * s_pos
    const auto pos = x_.head(2 * n);
    const auto vel = x_.tail(2 * n);
    const auto wv = w.tail(2 * n);
    const Pair* t = pairs_.data();
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j, ++t) {
        const double dx = pos(2 * i) - pos(2 * j);
        const double dy = pos(2 * i + 1) - pos(2 * j + 1);
        const double dvx = vel(2 * j) - vel(2 * i);
        const double dvy = vel(2 * j + 1) - vel(2 * i + 1);
        const double bx = wv(2 * i) - wv(2 * j);
        const double by = wv(2 * i + 1) - wv(2 * j + 1);
        const double s_vel = dvx * bx + dvy * by;
        const double s_pos = dx * bx + dy * by;
        if (wx) {
          Vector& out = *wx;
          const double gx = inv_n * (t->rate_slope * dx * s_vel - t->g * bx - t->q * dx * s_pos);
          const double gy = inv_n * (t->rate_slope * dy * s_vel - t->g * by - t->q * dy * s_pos);
          out(2 * i) += gx;
          out(2 * i + 1) += gy;
          out(2 * j) -= gx;
          out(2 * j + 1) -= gy;
          const double hv = inv_n * t->rate;
          out(2 * n + 2 * i) -= hv * bx;
          out(2 * n + 2 * i + 1) -= hv * by;
          out(2 * n + 2 * j) += hv * bx;
          out(2 * n + 2 * j + 1) += hv * by;
        }
        if (wtheta) {
          acc_gamma += t->dgamma * s_vel;
          const double sa = t->exp_a_r * s_pos;
          const double sr = t->exp_r_r * s_pos;
          acc_a += sa;
          acc_r += sr;
          acc_ra += sa * (t->r - consts_.l_a);
          acc_rr += sr * (t->r - consts_.l_r);
        }
      }
    }
    if (wtheta) {
      // Potential partials: dU'/dc_a = e_a / l_a, dU'/dc_r = -e_r / l_r,
      // dU'/dl_a = c_a e_a (r - l_a) / l_a^3, dU'/dl_r = -c_r e_r (r - l_r) / l_r^3,
      // each entering vdot_i as -dU' d / r.
      wtheta->resize(CSParams::size);
      (*wtheta)(0) = inv_n * acc_gamma;
      (*wtheta)(1) = -inv_n * consts_.inv_la * acc_a;
      (*wtheta)(2) = inv_n * consts_.inv_lr * acc_r;
      (*wtheta)(3) = -inv_n * consts_.ca_la3 * acc_ra;
      (*wtheta)(4) = inv_n * consts_.cr_lr3 * acc_rr;
    }
  }

 private:
  struct Pair {
    double rate = 0.0;
    double rate_slope = 0.0;
    double g = 0.0;
    double q = 0.0;
    double dgamma = 0.0;   // dH/dgamma
    double exp_a_r = 0.0;  // exp(-r / l_a) / r
    double exp_r_r = 0.0;  // exp(-r / l_r) / r
    double r = 0.0;
  };

  Index pair_index(Index i, Index j) const { return i * (2 * n_ - i - 1) / 2 + (j - i - 1); }

  Index n_;
  Vector x_;
  PotentialConsts consts_;
  std::vector<Pair> pairs_;
};

}  // namespace

Vector CSParams::to_vector() const {
  Vector v(size);
  v << gamma, c_a, c_r, l_a, l_r;
  return v;
}

CSParams CSParams::from_vector(ConstVectorRef theta) {
  if (theta.size() != size) {
    throw DimensionError("Cucker-Smale parameter vector must have 5 entries, got " +
                         std::to_string(theta.size()));
  }
  return {theta(0), theta(1), theta(2), theta(3), theta(4)};
}

Vector SwarmState::flatten() const {
  const Index n = num_particles();
  if (positions.cols() != 2 || velocities.rows() != n || velocities.cols() != 2) {
    throw DimensionError("swarm state must hold N x 2 positions and velocities");
  }
  Vector flat(4 * n);
  for (Index i = 0; i < n; ++i) {
    flat(2 * i) = positions(i, 0);
    flat(2 * i + 1) = positions(i, 1);
    flat(2 * n + 2 * i) = velocities(i, 0);
    flat(2 * n + 2 * i + 1) = velocities(i, 1);
  }
  return flat;
}

SwarmState SwarmState::unflatten(ConstVectorRef flat) {
  if (flat.size() % 4 != 0 || flat.size() == 0) {
    throw DimensionError("flat swarm state must have a positive multiple of 4 entries");
  }
  const Index n = flat.size() / 4;
  SwarmState s{Matrix(n, 2), Matrix(n, 2)};
  for (Index i = 0; i < n; ++i) {
    s.positions(i, 0) = flat(2 * i);
    s.positions(i, 1) = flat(2 * i + 1);
    s.velocities(i, 0) = flat(2 * n + 2 * i);
    s.velocities(i, 1) = flat(2 * n + 2 * i + 1);
  }
  return s;
}

double communication_rate(double r, double gamma) { return std::pow(1.0 + r * r, -gamma); }

double potential_deriv(double r, const CSParams& params) {
  if (!(r > 0.0)) throw EvaluationError("potential derivative is singular at r = 0");
  check_params(params);
  return params.c_a / params.l_a * std::exp(-r / params.l_a) -
         params.c_r / params.l_r * std::exp(-r / params.l_r);
}

CuckerSmale::CuckerSmale(Index num_particles, CoincidentPolicy policy)
    : num_particles_(num_particles), policy_(policy) {
  if (num_particles <= 0) throw DimensionError("Cucker-Smale model needs at least one particle");
}

void CuckerSmale::eval(ConstVectorRef x, ConstVectorRef theta, VectorRef out) const {
  check_dims(x, theta);
  const CSParams p = CSParams::from_vector(theta);
  check_params(p);
  const PotentialConsts k(p);
  const Index n = num_particles_;
  const double inv_n = 1.0 / static_cast<double>(n);
  out.head(2 * n) = x.tail(2 * n);
  out.tail(2 * n).setZero();
  for_each_pair(x, n, k, policy_, [&](const PairTerms& t) {
    const PairCoeffs c = coeffs(t, k);
    const double ax = t.rate * (x(2 * n + 2 * t.j) - x(2 * n + 2 * t.i)) - c.g * t.dx;
    const double ay = t.rate * (x(2 * n + 2 * t.j + 1) - x(2 * n + 2 * t.i + 1)) - c.g * t.dy;
    out(2 * n + 2 * t.i) += inv_n * ax;
    out(2 * n + 2 * t.i + 1) += inv_n * ay;
    out(2 * n + 2 * t.j) -= inv_n * ax;
    out(2 * n + 2 * t.j + 1) -= inv_n * ay;
  });
}

Matrix CuckerSmale::jac_state(ConstVectorRef x, ConstVectorRef theta) const {
  check_dims(x, theta);
  const CSParams p = CSParams::from_vector(theta);
  check_params(p);
  const PotentialConsts k(p);
  const Index n = num_particles_;
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix jac = Matrix::Zero(4 * n, 4 * n);
  jac.topRightCorner(2 * n, 2 * n).setIdentity();
  for_each_pair(x, n, k, policy_, [&](const PairTerms& t) {
    const PairCoeffs c = coeffs(t, k);
    const Eigen::Vector2d d(t.dx, t.dy);
    const Eigen::Vector2d dv(x(2 * n + 2 * t.j) - x(2 * n + 2 * t.i),
                             x(2 * n + 2 * t.j + 1) - x(2 * n + 2 * t.i + 1));
    const Eigen::Matrix2d a =
        inv_n * (c.rate_slope * dv * d.transpose() - c.g * Eigen::Matrix2d::Identity() -
                 c.q * d * d.transpose());
    const Index vi = 2 * n + 2 * t.i;
    const Index vj = 2 * n + 2 * t.j;
    jac.block<2, 2>(vi, 2 * t.i) += a;
    jac.block<2, 2>(vi, 2 * t.j) -= a;
    jac.block<2, 2>(vj, 2 * t.j) += a;
    jac.block<2, 2>(vj, 2 * t.i) -= a;
    const double hv = inv_n * t.rate;
    for (int k = 0; k < 2; ++k) {
      jac(vi + k, vi + k) -= hv;
      jac(vi + k, vj + k) += hv;
      jac(vj + k, vj + k) -= hv;
      jac(vj + k, vi + k) += hv;
    }
  });
  return jac;
}

Matrix CuckerSmale::jac_params(ConstVectorRef x, ConstVectorRef theta) const {
  check_dims(x, theta);
  const CSParams p = CSParams::from_vector(theta);
  check_params(p);
  const PotentialConsts k(p);
  const Index n = num_particles_;
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix jac = Matrix::Zero(4 * n, CSParams::size);
  for_each_pair(x, n, k, policy_, [&](const PairTerms& t) {
    const double dvx = x(2 * n + 2 * t.j) - x(2 * n + 2 * t.i);
    const double dvy = x(2 * n + 2 * t.j + 1) - x(2 * n + 2 * t.i + 1);
    const auto partials = param_partials(t, k, dvx, dvy);
    for (Index k = 0; k < CSParams::size; ++k) {
      const auto& pk = partials[static_cast<std::size_t>(k)];
      jac(2 * n + 2 * t.i, k) += inv_n * pk[0];
      jac(2 * n + 2 * t.i + 1, k) += inv_n * pk[1];
      jac(2 * n + 2 * t.j, k) -= inv_n * pk[0];
      jac(2 * n + 2 * t.j + 1, k) -= inv_n * pk[1];
    }
  });
  return jac;
}

void CuckerSmale::sensitivity_rhs(ConstVectorRef x, ConstVectorRef theta, ConstMatrixRef sens,
                                  VectorRef dx, MatrixRef dsens) const {
  check_dims(x, theta);
  const CSParams p = CSParams::from_vector(theta);
  check_params(p);
  const PotentialConsts k(p);
  const Index n = num_particles_;
  const double inv_n = 1.0 / static_cast<double>(n);
  using Block = Eigen::Matrix<double, 2, CSParams::size>;
  dx.head(2 * n) = x.tail(2 * n);
  dx.tail(2 * n).setZero();
  dsens.topRows(2 * n) = sens.bottomRows(2 * n);
  dsens.bottomRows(2 * n).setZero();
  for_each_pair(x, n, k, policy_, [&](const PairTerms& t) {
    const PairCoeffs c = coeffs(t, k);
    const Index vi = 2 * n + 2 * t.i;
    const Index vj = 2 * n + 2 * t.j;
    const double dvx = x(vj) - x(vi);
    const double dvy = x(vj + 1) - x(vi + 1);

    const double ax = t.rate * dvx - c.g * t.dx;
    const double ay = t.rate * dvy - c.g * t.dy;
    dx(vi) += inv_n * ax;
    dx(vi + 1) += inv_n * ay;
    dx(vj) -= inv_n * ax;
    dx(vj + 1) -= inv_n * ay;

    const Block dsx = sens.middleRows<2>(2 * t.i) - sens.middleRows<2>(2 * t.j);
    const Block dsv = sens.middleRows<2>(vj) - sens.middleRows<2>(vi);
    const Eigen::Matrix<double, 1, CSParams::size> proj =
        t.dx * dsx.row(0) + t.dy * dsx.row(1);
    Block contrib;
    contrib.row(0) = (c.rate_slope * dvx - c.q * t.dx) * proj - c.g * dsx.row(0) +
                     t.rate * dsv.row(0);
    contrib.row(1) = (c.rate_slope * dvy - c.q * t.dy) * proj - c.g * dsx.row(1) +
                     t.rate * dsv.row(1);
    const auto partials = param_partials(t, k, dvx, dvy);
    for (Index k = 0; k < CSParams::size; ++k) {
      contrib(0, k) += partials[static_cast<std::size_t>(k)][0];
      contrib(1, k) += partials[static_cast<std::size_t>(k)][1];
    }
    contrib *= inv_n;
    dsens.middleRows<2>(vi) += contrib;
    dsens.middleRows<2>(vj) -= contrib;
  });
}

std::unique_ptr<PointLinearization> CuckerSmale::linearize(ConstVectorRef x,
                                                           ConstVectorRef theta) const {
  check_dims(x, theta);
  const CSParams p = CSParams::from_vector(theta);
  check_params(p);
  return std::make_unique<CSLinearization>(num_particles_, x, p, policy_);
}

Vector cs_rhs(const SwarmState& state, const CSParams& params, CoincidentPolicy policy) {
  const CuckerSmale field(state.num_particles(), policy);
  return field(state.flatten(), params.to_vector());
}

Matrix cs_jac_state(const SwarmState& state, const CSParams& params, CoincidentPolicy policy) {
  const CuckerSmale field(state.num_particles(), policy);
  return field.jac_state(state.flatten(), params.to_vector());
}

Matrix cs_jac_params(const SwarmState& state, const CSParams& params, CoincidentPolicy policy) {
  const CuckerSmale field(state.num_particles(), policy);
  return field.jac_params(state.flatten(), params.to_vector());
}

}  // namespace odefit
