#include <doctest.h>

#include "geometry_checks.hpp"
#include "revmarkov/error.hpp"
#include "revmarkov/generators.hpp"
#include "revmarkov/oracle_qp.hpp"
#include "revmarkov/rtr_solver.hpp"

using namespace revmarkov;

namespace {

MinimizeResult solve(const StochasticMatrix& a, const TrustRegionConfig& cfg = {}) {
  const ProblemData problem(a, stationary_vector(a));
  const Manifold m(problem.pi_hat());
  return minimize(problem, m, m.point(problem.initial_guess()), cfg);
}

}  // namespace

TEST_CASE("two-state chains are returned unchanged") {
  Matrix a(2, 2);
  a << 0.9, 0.1, 0.35, 0.65;
  const StochasticMatrix s = validate_stochastic(a);
  const ProblemData problem(s, stationary_vector(s));
  const Manifold m(problem.pi_hat());
  const MinimizeResult r = minimize(problem, m, m.point(problem.initial_guess()));
  CHECK(r.trace.termination == TerminationReason::Converged);
  CHECK((problem.from_manifold(r.point) - a).norm() <= 1e-12);
}

TEST_CASE("a reversible chain is recovered from a random start") {
  Vector pi = Vector::LinSpaced(7, 1.0, 3.0);
  pi /= pi.sum();
  const StochasticMatrix a = mh_reversibilize(validate_stochastic(checks::random_stochastic(7, 4)), pi);
  const ProblemData problem(a, StationaryDistribution(pi));
  const Manifold m(problem.pi_hat());
  TrustRegionConfig cfg;
  cfg.grad_tol = 1e-10;
  const MinimizeResult r = minimize(problem, m, m.random_point(5), cfg);
  CHECK(r.trace.termination == TerminationReason::Converged);
  CHECK((problem.from_manifold(r.point) - a.matrix()).norm() / a.matrix().norm() <= 1e-8);
}

TEST_CASE("trust-region trace is monotone in cost over accepted steps") {
  const MinimizeResult r = solve(validate_stochastic(checks::random_stochastic(12, 6)));
  double last = std::numeric_limits<double>::infinity();
  for (const IterationRecord& rec : r.trace.records) {
    CHECK(rec.cost <= last + 1e-15);
    last = rec.cost;
  }
  CHECK(r.trace.final_cost <= last);
  CHECK(r.trace.termination == TerminationReason::Converged);
  CHECK(r.trace.final_grad_norm <= 1e-6);
}

TEST_CASE("solver agrees with the Dykstra oracle on a positive instance") {
  const StochasticMatrix a = validate_stochastic(checks::random_stochastic(5, 8));
  const StationaryDistribution pi = stationary_vector(a);
  const ProblemData problem(a, pi);
  const Manifold m(problem.pi_hat());
  TrustRegionConfig cfg;
  cfg.grad_tol = 1e-10;
  const MinimizeResult r = minimize(problem, m, m.point(problem.initial_guess()), cfg);
  const Matrix oracle = dykstra_nearest(a.matrix(), pi.pi()).x;
  REQUIRE(oracle.minCoeff() > 1e-8);
  CHECK((problem.from_manifold(r.point) - oracle).norm() / a.matrix().norm() <= 1e-8);
}

TEST_CASE("configuration validation") {
  TrustRegionConfig cfg;
  cfg.rho_prime = 0.5;
  CHECK_THROWS_AS(cfg.resolved(4), Error);
  const TrustRegionConfig d = TrustRegionConfig{}.resolved(5);
  CHECK(d.delta_bar == doctest::Approx(std::sqrt(10.0)));
  CHECK(d.delta0 == doctest::Approx(std::sqrt(10.0) / 8));
  CHECK(d.max_inner == 10);
}
