#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include <odefit/collocation.hpp>
#include <odefit/cucker_smale.hpp>
#include <odefit/errors.hpp>
#include <odefit/simple_fields.hpp>

using namespace odefit;

namespace {

StateMatrix exp_samples(double h, Index n) {
  StateMatrix x(n + 1, 1);
  for (Index i = 0; i <= n; ++i) x(i, 0) = std::exp(-h * static_cast<double>(i));
  return x;
}

struct CsInstance {
  CuckerSmale field{3};
  IdentityObservation obs{12};
  TimeGrid grid{0.0, 0.1, 5};
  StateMatrix x;
  StateMatrix targets;
  Vector theta;
  StateMatrix lambda;

  explicit CsInstance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const Vector x0 = oracle::random_swarm(rng, 3, 0.5);
    theta = oracle::random_cs_theta(rng);
    x = solve(field, theta, x0, grid).states;
    targets = x;
    for (Index k = 0; k < x.size(); ++k) {
      x.data()[k] += 0.05 * nd(rng);
      targets.data()[k] += 0.01 * nd(rng);
    }
    lambda.resize(5, 12);
    for (Index k = 0; k < lambda.size(); ++k) lambda.data()[k] = nd(rng);
    theta *= 1.1;
  }
};

}  // namespace

TEST_CASE("residual matches the frozen e^{-t} values") {
  const AffineField f = AffineField::decay(-1.0);
  const IdentityObservation obs(1);
  const StateMatrix x = exp_samples(0.1, 1);
  const Vector th = Vector::Zero(1);

  ResidualConfig sixth;
  CHECK(HermiteSimpson(f, obs, {0.0, 0.1, 1}, sixth).residual(x, th)(0, 0) ==
        doctest::Approx(oracle::frozen::hs_residual_beta_sixth).epsilon(1e-10));
  ResidualConfig eighth;
  eighth.midpoint_coeff = 0.125;
  CHECK(HermiteSimpson(f, obs, {0.0, 0.1, 1}, eighth).residual(x, th)(0, 0) ==
        doctest::Approx(oracle::frozen::hs_residual_beta_eighth).epsilon(1e-6));
}

TEST_CASE("residual agrees with the pointwise oracle on Cucker-Smale") {
  const CsInstance inst(3);
  for (double beta : {1.0 / 6.0, 1.0 / 8.0}) {
    ResidualConfig cfg;
    cfg.midpoint_coeff = beta;
    const HermiteSimpson hs(inst.field, inst.obs, inst.grid, cfg);
    const StateMatrix r = hs.residual(inst.x, inst.theta);
    const StateMatrix ref = oracle::hs_residual(inst.field, inst.x, inst.theta, 0.1, beta);
    CHECK((r - ref).norm() < 1e-13);
  }
}

TEST_CASE("residual vanishes on constant trajectories of f = 0") {
  const AffineField f = AffineField::zero(3);
  const IdentityObservation obs(3);
  StateMatrix x(9, 3);
  x.rowwise() = Eigen::RowVector3d(1.5, -2.0, 0.25);
  CHECK(HermiteSimpson(f, obs, {0.0, 0.2, 8}).residual(x, Vector::Zero(1)).norm() == 0.0);
}

TEST_CASE("residual order under step halving") {
  const AffineField f = AffineField::decay(-1.0);
  const IdentityObservation obs(1);
  auto max_residual = [&](double h, double beta) {
    ResidualConfig cfg;
    cfg.midpoint_coeff = beta;
    const Index n = static_cast<Index>(std::lround(1.0 / h));
    return HermiteSimpson(f, obs, {0.0, h, n}, cfg)
        .residual(exp_samples(h, n), Vector::Zero(1))
        .cwiseAbs()
        .maxCoeff();
  };
  const double r8 = max_residual(0.1, 0.125) / max_residual(0.05, 0.125);
  CHECK(r8 > 20.0);
  CHECK(r8 < 45.0);
  CHECK(max_residual(0.1, 1.0 / 6.0) / max_residual(0.05, 1.0 / 6.0) > 6.0);
}

TEST_CASE("objective gradients match central differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CAPTURE(seed);
    const CsInstance inst(100 + seed);
    ResidualConfig cfg;
    cfg.residual_weight = 0.7;
    const HermiteSimpson hs(inst.field, inst.obs, inst.grid, cfg);

    const Vector gx = flat(hs.grad_x(inst.x, inst.theta, inst.targets));
    const Vector fdx = oracle::fd_gradient(
        [&](const Vector& v) {
          StateMatrix y = inst.x;
          flat(y) = v;
          return hs.loss(y, inst.theta, inst.targets);
        },
        flat(inst.x), 1e-6);
    CHECK(oracle::rel_err(gx, fdx) < 1e-6);

    const Vector gt = hs.grad_theta(inst.x, inst.theta, inst.targets);
    const Vector fdt = oracle::fd_gradient(
        [&](const Vector& th) { return hs.loss(inst.x, th, inst.targets); }, inst.theta, 1e-6);
    CHECK(oracle::rel_err(gt, fdt) < 1e-6);
  }
}

TEST_CASE("augmented Lagrangian value and gradients") {
  const CsInstance inst(7);
  const HermiteSimpson hs(inst.field, inst.obs, inst.grid);
  const MultiplierState mult{inst.lambda, 2.5};

  const CollocationEval e = hs.auglag(inst.x, inst.theta, mult, inst.targets);
  const StateMatrix r = hs.residual(inst.x, inst.theta);
  const double expected = hs.data_loss(inst.x, inst.targets) + flat(inst.lambda).dot(flat(r)) +
                          0.5 * 2.5 * r.squaredNorm();
  CHECK(e.value == doctest::Approx(expected).epsilon(1e-13));

  auto value = [&](const StateMatrix& y, const Vector& th) {
    return hs.auglag(y, th, mult, inst.targets).value;
  };
  const Vector fdx = oracle::fd_gradient(
      [&](const Vector& v) {
        StateMatrix y = inst.x;
        flat(y) = v;
        return value(y, inst.theta);
      },
      flat(inst.x), 1e-6);
  CHECK(oracle::rel_err(flat(e.grad_x), fdx) < 1e-6);
  const Vector fdt =
      oracle::fd_gradient([&](const Vector& th) { return value(inst.x, th); }, inst.theta, 1e-6);
  CHECK(oracle::rel_err(e.grad_theta, fdt) < 1e-6);
}

TEST_CASE("windows restrict residuals and gradients") {
  const CsInstance inst(9);
  const HermiteSimpson hs(inst.field, inst.obs, inst.grid);
  const Window w{1, 2};
  const CollocationEval e = hs.evaluate(inst.x, inst.theta, inst.targets, nullptr, true, true, w);
  const StateMatrix full = hs.residual(inst.x, inst.theta);

  CHECK(e.residual.row(0).norm() == 0.0);
  CHECK(e.residual.row(3).norm() == 0.0);
  CHECK(e.residual.row(4).norm() == 0.0);
  CHECK((e.residual.middleRows(1, 2) - full.middleRows(1, 2)).norm() == 0.0);
  CHECK(e.grad_x.row(0).norm() == 0.0);
  CHECK(e.grad_x.row(4).norm() == 0.0);
  CHECK(e.grad_x.row(5).norm() == 0.0);
  CHECK(e.grad_x.middleRows(1, 3).norm() > 0.0);

  const double window_data = (inst.x.middleRows(1, 3) - inst.targets.middleRows(1, 3)).squaredNorm();
  CHECK(e.data_loss == doctest::Approx(window_data).epsilon(1e-14));
  CHECK_THROWS_AS(hs.resolve({4, 3}), std::invalid_argument);
}

TEST_CASE("thread count does not change results") {
  CuckerSmale field(6);
  IdentityObservation obs(24);
  const TimeGrid grid{0.0, 0.05, 40};
  std::mt19937_64 rng(5);
  StateMatrix x(41, 24), y(41, 24);
  for (Index i = 0; i <= 40; ++i) {
    x.row(i) = oracle::random_swarm(rng, 6).transpose();
    y.row(i) = oracle::random_swarm(rng, 6).transpose();
  }
  const Vector th = oracle::random_cs_theta(rng);
  ResidualConfig one, four;
  four.threads = 4;
  const CollocationEval a =
      HermiteSimpson(field, obs, grid, one).evaluate(x, th, y, nullptr, true, true);
  const CollocationEval b =
      HermiteSimpson(field, obs, grid, four).evaluate(x, th, y, nullptr, true, true);
  CHECK(a.value == b.value);
  CHECK(a.grad_x == b.grad_x);
  CHECK(a.grad_theta == b.grad_theta);
}

TEST_CASE("shape errors") {
  const CsInstance inst(1);
  const HermiteSimpson hs(inst.field, inst.obs, inst.grid);
  StateMatrix bad(5, 12);
  bad.setZero();
  CHECK_THROWS_AS(hs.residual(bad, inst.theta), DimensionError);
}
