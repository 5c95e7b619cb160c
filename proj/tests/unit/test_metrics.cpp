#include "doctest.h"

#include <odefit/errors.hpp>
#include <odefit/metrics.hpp>
#include <odefit/number_format.hpp>
#include <odefit/simple_fields.hpp>
#include <odefit/svg_plot.hpp>

using namespace odefit;

TEST_CASE("sse and pooled rsse") {
  StateMatrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 1, 1, 1, 1;
  CHECK(sse(a, b) == 14.0);
  CHECK(rsse(a, b) == 14.0 / 4.0);
  CHECK_THROWS_AS(rsse(a, StateMatrix::Zero(2, 2)), MetricError);
  CHECK_THROWS_AS(sse(a, StateMatrix::Zero(3, 2)), DimensionError);
}

TEST_CASE("rsse on the ODE is zero at the generating parameters") {
  const AffineField f = AffineField::scalar_growth();
  const IdentityObservation obs(1);
  const TimeGrid grid{0.0, 0.1, 10};
  const Vector th = Vector::Constant(1, -0.5), x0 = Vector::Constant(1, 1.0);
  const StateMatrix target = solve(f, th, x0, grid).states;
  CHECK(*rsse_on_ode(f, th, x0, grid, {}, obs, target) == 0.0);
  CHECK(*rsse_on_ode(f, Vector::Constant(1, -0.4), x0, grid, {}, obs, target) > 0.0);

  SolverConfig tight;
  tight.max_steps = 50;
  CHECK_FALSE(rsse_on_ode(f, Vector::Constant(1, 5000.0), x0, grid, tight, obs, target));
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("svg plot starts a new segment after each unusable point") {
  PlotSpec spec;
  spec.title = "loss";
  const std::string svg =
      render_line_plot(spec, {{"a", {1, 2, 3, 4}, {1.0, 0.1, -1.0, 0.01}}, {"b", {1, 2}, {2, 3}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  auto count = [&](const std::string& needle) {
    std::size_t c = 0;
    for (auto pos = svg.find(needle); pos != std::string::npos; pos = svg.find(needle, pos + 1)) {
      ++c;
    }
    return c;
  };
  CHECK(count("<path d=\"M") == 2);
  CHECK(count(" M") == 1);
}
