#include "self_check.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <odefit/algorithms.hpp>
#include <odefit/collocation.hpp>
#include <odefit/cucker_smale.hpp>
#include <odefit/number_format.hpp>
#include <odefit/sensitivity.hpp>
#include <odefit/simple_fields.hpp>

namespace odefit::cli {
namespace {

struct Check {
  std::string name;
  double tolerance;
  std::function<double()> measure;  // returns the error to compare against tolerance
};

Vector random_swarm(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector x(4 * n);
  for (auto& v : x) v = u(rng);
  return x;
}

double collocation_fd_error() {
  std::mt19937_64 rng(11);
  const CuckerSmale field(3);
  const IdentityObservation obs(12);
  const TimeGrid grid{0.0, 0.1, 4};
  const HermiteSimpson hs(field, obs, grid);
  StateMatrix x(grid.num_samples(), 12);
  StateMatrix y(grid.num_samples(), 12);
  for (Index i = 0; i < x.rows(); ++i) {
    x.row(i) = random_swarm(rng, 3).transpose();
    y.row(i) = random_swarm(rng, 3).transpose();
  }
  const Vector theta = CSParams{0.6, 1.1, 0.9, 1.7, 0.5}.to_vector();
  const CollocationEval ev = hs.evaluate(x, theta, y, nullptr, true, true);
  double worst = 0.0;
  const double step = 1e-6;
  for (Index k = 0; k < x.size(); ++k) {
    StateMatrix xp = x, xm = x;
    flat(xp)(k) += step;
    flat(xm)(k) -= step;
    const double fd = (hs.loss(xp, theta, y) - hs.loss(xm, theta, y)) / (2 * step);
    worst = std::max(worst, std::abs(flat(ev.grad_x)(k) - fd) / std::max(1.0, std::abs(fd)));
  }
  for (Index k = 0; k < theta.size(); ++k) {
    Vector tp = theta, tm = theta;
    tp(k) += step;
    tm(k) -= step;
    const double fd = (hs.loss(x, tp, y) - hs.loss(x, tm, y)) / (2 * step);
    worst = std::max(worst, std::abs(ev.grad_theta(k) - fd) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

}  // namespace

bool run_self_checks(std::ostream& out) {
  const std::vector<Check> checks{
      {"cucker-smale jacobians vs central differences", 1e-5,
       [] {
         std::mt19937_64 rng(3);
         double worst = 0.0;
         for (Index n : {1, 3, 5}) {
           const CuckerSmale field(n);
           for (int k = 0; k < 10; ++k) {
             const Vector theta = CSParams{0.8, 1.2, 0.9, 1.5, 0.6}.to_vector();
             worst = std::max(worst, fd_check_jacobians(field, random_swarm(rng, n), theta, 1e-6));
           }
         }
         return worst;
       }},
      {"dopri5 on xdot = -x at t = 1", 1e-7,
       [] {
         SolverConfig cfg;
         cfg.rtol = 1e-8;
         const auto field = AffineField::decay(-1.0);
         const auto traj = solve(field, Vector::Zero(1), Vector::Ones(1), {0.0, 0.1, 10}, cfg);
         return std::abs(traj.states(10, 0) - std::exp(-1.0));
       }},
      {"sensitivity of xdot = theta x at t = 1", 1e-6,
       [] {
         const auto field = AffineField::scalar_growth();
         const auto st =
             solve_with_sensitivity(field, Vector::Ones(1), Vector::Ones(1), {0.0, 0.1, 10});
         return std::abs(st.sensitivity.values[10](0, 0) - std::exp(1.0));
       }},
      {"collocation residual vanishes on a constant trajectory of f = 0", 0.0,
       [] {
         const auto field = AffineField::zero(3);
         const IdentityObservation obs(3);
         const TimeGrid grid{0.0, 0.1, 8};
         StateMatrix x(grid.num_samples(), 3);
         x.rowwise() = Eigen::RowVector3d(0.3, -1.2, 2.0);
         return HermiteSimpson(field, obs, grid).residual(x, Vector::Zero(1)).cwiseAbs().maxCoeff();
       }},
      {"collocation gradients vs central differences", 1e-6, collocation_fd_error},
      {"gradient-descent recovery on xdot = theta x", 1e-8,
       [] {
         const auto field = AffineField::scalar_growth();
         const IdentityObservation obs(1);
         const TimeGrid grid{0.0, 0.1, 10};
         const Vector x0 = Vector::Ones(1);
         StateMatrix targets = solve(field, Vector::Constant(1, 0.7), x0, grid).states;
         const Problem p{field, obs, targets, x0, grid, {}};
         return check_alg0_recovery(p, Vector::Constant(1, 0.4), 0.01, 0.01);
       }},
  };

  bool all = true;
  for (const Check& c : checks) {
    double err = 0.0;
    bool ok = false;
    std::string detail;
    try {
      err = c.measure();
      ok = err <= c.tolerance;
      detail = "error " + format_double(err) + " (tolerance " + format_double(c.tolerance) + ")";
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    out << (ok ? "PASS  " : "FAIL  ") << c.name << ": " << detail << '\n';
    all = all && ok;
  }
  return all;
}

}  // namespace odefit::cli
