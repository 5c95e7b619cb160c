#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include <odefit/cucker_smale.hpp>
#include <odefit/errors.hpp>

using namespace odefit;

namespace {

Vector frozen_state() { return Eigen::Map<const Vector>(oracle::frozen::cs_state, 12); }
Vector frozen_theta() { return Eigen::Map<const Vector>(oracle::frozen::cs_theta, 5); }

}  // namespace

TEST_CASE("rhs matches the frozen high-precision value") {
  const CuckerSmale cs(3);
  const Vector got = cs(frozen_state(), frozen_theta());
  for (Index k = 0; k < 12; ++k) {
    CAPTURE(k);
    CHECK(got(k) == doctest::Approx(oracle::frozen::cs_rhs[k]).epsilon(1e-14));
  }
}

TEST_CASE("rhs agrees with the double-loop oracle") {
  std::mt19937_64 rng(11);
  for (Index n : {1, 2, 4, 7}) {
    const CuckerSmale cs(n);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector x = oracle::random_swarm(rng, n);
      const Vector th = oracle::random_cs_theta(rng);
      CHECK((cs(x, th) - oracle::cs_rhs(x, th)).norm() < 1e-13);
    }
  }
}

TEST_CASE("Jacobians match finite differences") {
  std::mt19937_64 rng(12);
  for (Index n : {1, 3, 5}) {
    const CuckerSmale cs(n);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector x = oracle::random_swarm(rng, n);
      const Vector th = oracle::random_cs_theta(rng);
      CHECK(fd_check_jacobians(cs, x, th, 1e-6) < 1e-7);
    }
  }
}

TEST_CASE("linearization products equal the dense Jacobian products") {
  std::mt19937_64 rng(13);
  const CuckerSmale cs(6);
  const Vector x = oracle::random_swarm(rng, 6);
  const Vector th = oracle::random_cs_theta(rng);
  Vector w(24);
  for (Index k = 0; k < 24; ++k) w(k) = std::uniform_real_distribution<double>(-1, 1)(rng);

  const auto lin = cs.linearize(x, th);
  Vector wx, wt;
  lin->vjp(w, &wx, &wt);
  CHECK((lin->value() - cs(x, th)).norm() == 0.0);
  CHECK((wx - cs.jac_state(x, th).transpose() * w).norm() < 1e-13);
  CHECK((wt - cs.jac_params(x, th).transpose() * w).norm() < 1e-13);

  Vector only_x;
  lin->vjp(w, &only_x, nullptr);
  CHECK(only_x == wx);
}

TEST_CASE("sensitivity rhs is J S + df/dtheta") {
  std::mt19937_64 rng(14);
  const CuckerSmale cs(4);
  const Vector x = oracle::random_swarm(rng, 4);
  const Vector th = oracle::random_cs_theta(rng);
  const Matrix s = Matrix::Random(16, 5);
  Vector dx(16);
  Matrix ds(16, 5);
  cs.sensitivity_rhs(x, th, s, dx, ds);
  CHECK((dx - cs(x, th)).norm() < 1e-15);
  CHECK((ds - (cs.jac_state(x, th) * s + cs.jac_params(x, th))).norm() < 1e-13);
}

TEST_CASE("coincident particles") {
  Vector x = Vector::Zero(8);
  x(0) = 0.5;
  x(1) = 0.5;
  x(2) = 0.5;
  x(3) = 0.5;  // particles 0 and 1 share a position
  const Vector th = frozen_theta();
  CHECK_THROWS_AS(CuckerSmale(2)(x, th), EvaluationError);
  const Vector skipped = CuckerSmale(2, CoincidentPolicy::skip_pair)(x, th);
  CHECK(skipped.allFinite());
  CHECK(skipped.norm() == 0.0);
}

TEST_CASE("momentum is conserved and the field is shift invariant") {
  std::mt19937_64 rng(15);
  const CuckerSmale cs(5);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x = oracle::random_swarm(rng, 5);
    const Vector th = oracle::random_cs_theta(rng);
    const Vector f = cs(x, th);
    double sx = 0.0, sy = 0.0;
    for (Index i = 0; i < 5; ++i) {
      sx += f(10 + 2 * i);
      sy += f(10 + 2 * i + 1);
    }
    CHECK(std::abs(sx) < 1e-12);
    CHECK(std::abs(sy) < 1e-12);

    Vector shifted = x;
    for (Index i = 0; i < 5; ++i) {
      shifted(2 * i) += 0.75;
      shifted(2 * i + 1) -= 1.25;
      shifted(10 + 2 * i) += 0.3;
    }
    CHECK((cs(shifted, th).tail(10) - f.tail(10)).norm() < 1e-13);
  }
}

TEST_CASE("parameter and state containers round-trip") {
  const CSParams p{0.4, 1.1, 0.9, 2.5, 0.6};
  CHECK(CSParams::from_vector(p.to_vector()) == p);

  const Vector flat = frozen_state();
  const SwarmState s = SwarmState::unflatten(flat);
  CHECK(s.num_particles() == 3);
  CHECK(s.positions(1, 0) == -0.7);
  CHECK(s.velocities(2, 1) == -0.15);
  CHECK(s.flatten() == flat);

  const Vector via_free = cs_rhs(s, CSParams::from_vector(frozen_theta()));
  CHECK((via_free - CuckerSmale(3)(flat, frozen_theta())).norm() == 0.0);
}

TEST_CASE("scalar building blocks") {
  CHECK(communication_rate(0.0, 0.8) == 1.0);
  CHECK(communication_rate(2.0, 0.5) == doctest::Approx(1.0 / std::sqrt(5.0)));
  const CSParams p{1.0, 1.0, 1.0, 1.0, 1.0};
  CHECK(potential_deriv(0.3, p) == doctest::Approx(0.0));
  CHECK_THROWS_AS(potential_deriv(0.0, p), EvaluationError);
}
