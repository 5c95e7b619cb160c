#include <cmath>

#include "doctest.h"

#include <odefit/errors.hpp>
#include <odefit/ode_solver.hpp>
#include <odefit/simple_fields.hpp>

using namespace odefit;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

double rk4_error(double h) {
  SolverConfig cfg;
  cfg.method = SolverMethod::rk4;
  const TimeGrid grid{0.0, h, static_cast<Index>(std::lround(1.0 / h))};
  const Trajectory t = solve(AffineField::decay(-1.0), scalar(0.0), scalar(1.0), grid, cfg);
  return std::abs(t.states(grid.num_intervals, 0) - std::exp(-1.0));
}

}  // namespace

TEST_CASE("dopri5 reproduces exponential decay") {
  SolverConfig cfg;
  cfg.rtol = 1e-8;
  cfg.atol = 1e-10;
  const TimeGrid grid{0.0, 0.1, 10};
  const Trajectory t = solve(AffineField::decay(-1.0), scalar(0.0), scalar(1.0), grid, cfg);
  REQUIRE(t.states.rows() == 11);
  CHECK(t.states(0, 0) == 1.0);
  for (Index i = 0; i <= 10; ++i) {
    CHECK(std::abs(t.states(i, 0) - std::exp(-grid.time(i))) < 1e-8);
  }
}

TEST_CASE("harmonic oscillator follows cos and sin") {
  SolverConfig cfg;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-12;
  Vector x0(2);
  x0 << 1.0, 0.0;
  const TimeGrid grid{0.0, 0.25, 40};
  const Trajectory t =
      solve(AffineField::harmonic_oscillator(), scalar(0.0), x0, grid, cfg);
  for (Index i = 0; i <= 40; ++i) {
    CHECK(std::abs(t.states(i, 0) - std::cos(grid.time(i))) < 1e-8);
    CHECK(std::abs(t.states(i, 1) + std::sin(grid.time(i))) < 1e-8);
  }
}

TEST_CASE("rk4 is fourth order") {
  const double ratio = rk4_error(0.1) / rk4_error(0.05);
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("rk4 substeps refine the step") {
  SolverConfig one, four;
  one.method = four.method = SolverMethod::rk4;
  four.rk4_substeps = 4;
  const TimeGrid grid{0.0, 0.2, 5};
  const double exact = std::exp(-1.0);
  const double e1 = std::abs(
      solve(AffineField::decay(-1.0), scalar(0.0), scalar(1.0), grid, one).states(5, 0) - exact);
  const double e4 = std::abs(
      solve(AffineField::decay(-1.0), scalar(0.0), scalar(1.0), grid, four).states(5, 0) -
      exact);
  CHECK(e4 < e1 / 100.0);
}

TEST_CASE("a single dopri5 step on a linear field") {
  const auto r = dopri5_step(AffineField::decay(-1.0), scalar(0.0), 0.0, scalar(1.0), 0.1);
  CHECK(r.accepted);
  CHECK(std::abs(r.x_next(0) - std::exp(-0.1)) < 1e-8);
  CHECK(r.h_next > 0.0);
}

TEST_CASE("finite-time blow-up raises SolverError") {
  SolverConfig cfg;
  cfg.max_steps = 2000;
  const TimeGrid grid{0.0, 0.5, 20};
  CHECK_THROWS_AS(solve(AffineField::scalar_growth(), scalar(2000.0), scalar(1.0), grid, cfg),
                  SolverError);
}

TEST_CASE("configuration validation") {
  SolverConfig cfg;
  cfg.rtol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  TimeGrid grid{0.0, 0.0, 10};
  CHECK_THROWS_AS(grid.validate(), ConfigError);
  grid = {0.0, 0.1, 0};
  CHECK_THROWS_AS(grid.validate(), ConfigError);
  CHECK(TimeGrid{1.0, 0.5, 4}.final_time() == 3.0);
}
