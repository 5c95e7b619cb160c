#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include <odefit/algorithms.hpp>
#include <odefit/cucker_smale.hpp>
#include <odefit/errors.hpp>
#include <odefit/metrics.hpp>
#include <odefit/simple_fields.hpp>

using namespace odefit;

namespace {

struct DriftSetup {
  AffineField field = AffineField::drift(2);
  IdentityObservation obs{2};
  Vector truth = (Vector(2) << 0.5, -0.3).finished();
  Vector x0 = (Vector(2) << 1.0, 2.0).finished();
  TimeGrid grid{0.0, 0.1, 20};

  Problem problem() const {
    return Problem{field, obs, solve(field, truth, x0, grid).states, x0, grid, {}};
  }
};

struct CsSetup {
  CuckerSmale field{3};
  IdentityObservation obs{12};
  Vector truth;
  Vector x0;
  TimeGrid grid{0.0, 0.05, 20};

  CsSetup() {
    std::mt19937_64 rng(77);
    x0 = oracle::random_swarm(rng, 3, 0.5);
    truth = oracle::random_cs_theta(rng);
  }
  Problem problem() const {
    return Problem{field, obs, solve(field, truth, x0, grid).states, x0, grid, {}};
  }
};

TrainConfig config(Algorithm alg, int epochs) {
  TrainConfig cfg = TrainConfig::defaults_for(alg);
  cfg.epochs = epochs;
  return cfg;
}

}  // namespace

TEST_CASE("algorithm names") {
  CHECK(parse_algorithm("alg0") == Algorithm::alg0_direct);
  CHECK(parse_algorithm("alg0_direct") == Algorithm::alg0_direct);
  CHECK(parse_algorithm("alg3") == Algorithm::alg3);
  CHECK(to_string(Algorithm::alg2) == "alg2");
  CHECK_THROWS_AS(parse_algorithm("alg9"), ConfigError);
  CHECK(to_string(RunStatus::solver_failed) == "solver_failed");
}

TEST_CASE("default stepsizes") {
  CHECK(TrainConfig::defaults_for(Algorithm::alg1).state_optimizer.lr == 0.01);
  CHECK(TrainConfig::defaults_for(Algorithm::alg2).state_optimizer.lr == 1.0);
  CHECK(TrainConfig::defaults_for(Algorithm::alg0_direct).param_optimizer.kind ==
        OptimizerKind::adam);
  CHECK(TrainConfig::defaults_for(Algorithm::alg3).param_optimizer.kind == OptimizerKind::sgd);
}

TEST_CASE("alg1 takes the theta step at the freshly updated states") {
  const CsSetup s;
  const Problem p = s.problem();
  const Vector init = s.truth * 1.1;
  TrainConfig cfg = config(Algorithm::alg1, 2);

  std::vector<StateMatrix> seen_x;
  std::vector<Vector> seen_theta;
  TrainHooks hooks;
  hooks.before_theta_gradient = [&](int, const StateMatrix& x, const Vector& th) {
    seen_x.push_back(x);
    seen_theta.push_back(th);
  };
  train(p, {init}, cfg, nullptr, &hooks);
  REQUIRE(seen_x.size() == 2);

  const HermiteSimpson hs(s.field, s.obs, s.grid, cfg.residual);
  StateMatrix x = solve(s.field, init, s.x0, s.grid).states;
  StateMatrix g = hs.grad_x(x, init, p.targets);
  g.row(0).setZero();
  x -= 0.01 * g;
  x.row(0) = s.x0.transpose();
  CHECK((seen_x[0] - x).norm() < 1e-14);
  CHECK(seen_theta[0] == init);

  cfg.epochs = 1;
  const TrainResult one = train(p, {init}, cfg);
  CHECK(seen_theta[1] == one.theta);
  CHECK(one.x == seen_x[0]);
}

TEST_CASE("alg2 resets the states to the solution before stepping") {
  const CsSetup s;
  const Problem p = s.problem();
  const Vector init = s.truth * 0.9;
  std::vector<StateMatrix> seen;
  TrainHooks hooks;
  hooks.before_theta_gradient = [&](int, const StateMatrix& x, const Vector&) { seen.push_back(x); };
  train(p, {init}, config(Algorithm::alg2, 1), nullptr, &hooks);
  REQUIRE(seen.size() == 1);

  const StateMatrix reset = solve(s.field, init, s.x0, s.grid).states;
  StateMatrix expected = reset - 1.0 * 2.0 * (reset - p.targets);
  expected.row(0) = s.x0.transpose();
  CHECK((seen[0] - expected).norm() < 1e-13);
}

TEST_CASE("solver call counts") {
  const DriftSetup s;
  const Problem p = s.problem();
  const Vector init = (Vector(2) << 0.0, 0.0).finished();

  const TrainResult a0 = train(p, {init}, config(Algorithm::alg0_direct, 7));
  CHECK(a0.calls.sensitivity_solves == 7);
  CHECK(a0.calls.solves == 0);

  const TrainResult a1 = train(p, {init}, config(Algorithm::alg1, 7));
  CHECK(a1.calls.solves == 1);
  CHECK(a1.calls.sensitivity_solves == 0);

  const TrainResult a1s = train(p, {init, p.targets}, config(Algorithm::alg1, 7));
  CHECK(a1s.calls.solves == 0);

  const TrainResult a2 = train(p, {init}, config(Algorithm::alg2, 7));
  CHECK(a2.calls.solves == 7);

  const TrainResult a3 = train(p, {init}, config(Algorithm::alg3, 7));
  CHECK(a3.calls.solves == 1);
}

TEST_CASE("every algorithm fits the drift model and keeps x0 pinned") {
  const DriftSetup s;
  const Problem p = s.problem();
  const Vector init = Vector::Zero(2);
  for (Algorithm alg : {Algorithm::alg0_direct, Algorithm::alg1, Algorithm::alg2, Algorithm::alg3}) {
    CAPTURE(to_string(alg));
    TrainConfig cfg = config(alg, 400);
    cfg.rsse_every = 100;
    const TrainResult r = train(p, {init}, cfg);
    REQUIRE(r.status == RunStatus::completed);
    REQUIRE(r.record.rows.size() == 400);
    CHECK(r.record.rows.back().sse < r.record.rows.front().sse);
    CHECK(r.record.rows.back().rsse_ode < r.record.initial_rsse_ode);
    CHECK(std::isnan(r.record.rows[5].rsse_ode));
    CHECK(r.record.rows[99].rsse_ode >= 0.0);
    CHECK(r.x.row(0) == s.x0.transpose());
    CHECK(std::isfinite(r.final_residual_norm));
  }
}

TEST_CASE("multiplier update is lambda + rho r") {
  const CsSetup s;
  const Problem p = s.problem();
  const Vector init = s.truth * 1.05;
  TrainConfig cfg = config(Algorithm::alg3, 1);
  cfg.rho = 0.37;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  StateMatrix lambda(s.grid.num_intervals, 12);
  for (Index k = 0; k < lambda.size(); ++k) lambda.data()[k] = nd(rng);

  const TrainResult r = train(p, {init, std::nullopt, lambda}, cfg);
  const StateMatrix res =
      HermiteSimpson(s.field, s.obs, s.grid, cfg.residual).residual(r.x, r.theta);
  const StateMatrix expected = lambda + 0.37 * res;
  CHECK(r.lambda == expected);
}

TEST_CASE("early stop on a small theta gradient") {
  const DriftSetup s;
  const Problem p = s.problem();
  TrainConfig cfg = config(Algorithm::alg0_direct, 50);
  cfg.grad_norm_tol = 1e-6;
  const TrainResult r = train(p, {s.truth}, cfg);
  CHECK(r.status == RunStatus::converged);
  CHECK(r.record.rows.size() == 1);
  CHECK(r.theta == s.truth);
}

TEST_CASE("runaway stepsizes are reported, not thrown") {
  const CsSetup s;
  const Problem p = s.problem();
  TrainConfig cfg = config(Algorithm::alg1, 50);
  cfg.state_optimizer.lr = 1e8;
  const TrainResult r = train(p, {s.truth * 1.2}, cfg);
  CHECK((r.status == RunStatus::diverged || r.status == RunStatus::solver_failed));
  CHECK_FALSE(r.message.empty());
  CHECK(r.record.rows.size() < 50);
}

TEST_CASE("mini-batch schedule is uniform and reproducible") {
  const Index nt = 100, window = 10, bins = nt - window + 1;
  const std::size_t draws = 91000;
  const std::vector<Index> a = minibatch_schedule(42, nt, window, draws);
  CHECK(a == minibatch_schedule(42, nt, window, draws));
  CHECK(a != minibatch_schedule(43, nt, window, draws));

  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (Index start : a) {
    REQUIRE(start >= 0);
    REQUIRE(start <= nt - window);
    counts[static_cast<std::size_t>(start)] += 1.0;
  }
  const double expected = static_cast<double>(draws) / static_cast<double>(bins);
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 90 degrees of freedom; the 0.999 quantile is about 137.
  CHECK(chi2 < 137.0);
}

TEST_CASE("mini-batch training") {
  const DriftSetup s;
  const Problem p = s.problem();
  TrainConfig cfg = config(Algorithm::alg0_direct, 5);
  cfg.minibatch = MinibatchConfig{5, ResetMode::global_x0};
  CHECK_THROWS_AS(train(p, {Vector::Zero(2)}, cfg), ConfigError);

  for (ResetMode mode : {ResetMode::global_x0, ResetMode::local_state}) {
    for (Algorithm alg : {Algorithm::alg1, Algorithm::alg2, Algorithm::alg3}) {
      TrainConfig c = config(alg, 300);
      c.minibatch = MinibatchConfig{5, mode};
      c.seed = 9;
      const TrainResult r = train(p, {Vector::Zero(2)}, c);
      REQUIRE(r.status == RunStatus::completed);
      CHECK((r.theta - s.truth).norm() < (Vector::Zero(2) - s.truth).norm());
      CHECK(r.x.row(0) == s.x0.transpose());
    }
  }
}

TEST_CASE("recovery of the direct gradient step on scalar growth") {
  const AffineField f = AffineField::scalar_growth();
  const IdentityObservation obs(1);
  const TimeGrid grid{0.0, 0.1, 10};
  const Vector x0 = Vector::Constant(1, 1.0);
  const StateMatrix targets = solve(f, Vector::Constant(1, 0.3), x0, grid).states;
  const Problem p{f, obs, targets, x0, grid, {}};
  CHECK(check_alg0_recovery(p, Vector::Constant(1, 0.5), 0.01, 0.1) < 1e-12);
}

TEST_CASE("record sink receives every row in order") {
  struct Collect final : RecordSink {
    std::vector<int> epochs;
    void on_epoch(const EpochRow& row) override { epochs.push_back(row.epoch); }
  } sink;
  const DriftSetup s;
  train(s.problem(), {Vector::Zero(2)}, config(Algorithm::alg2, 6), &sink);
  CHECK(sink.epochs == std::vector<int>{1, 2, 3, 4, 5, 6});
}
