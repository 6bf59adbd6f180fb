#include <doctest.h>

#include "geometry_checks.hpp"
#include "revmarkov/error.hpp"
#include "revmarkov/generators.hpp"

using namespace revmarkov;

TEST_CASE("cost vanishes at a reversible target and to_manifold inverts from_manifold") {
  const StochasticMatrix q = validate_stochastic(checks::random_stochastic(6, 1));
  Vector pi = Vector::LinSpaced(6, 1.0, 6.0);
  pi /= pi.sum();
  const StochasticMatrix a = mh_reversibilize(q, pi);
  const ProblemData problem(a, StationaryDistribution(pi));
  const Manifold m(problem.pi_hat());
  const ManifoldPoint x = problem.to_manifold(m, a);
  CHECK(problem.cost(x) <= 1e-30);
  CHECK((problem.from_manifold(x) - a.matrix()).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK(problem.euclidean_grad(x).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("Euclidean gradient matches finite differences of the cost") {
  const StochasticMatrix a = validate_stochastic(checks::random_stochastic(4, 2));
  const ProblemData problem(a, stationary_vector(a));
  const Matrix x = checks::random_stochastic(4, 3);
  const Matrix g = problem.euclidean_grad(x);
  const double h = 1e-6;
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 4; ++j) {
      Matrix xp = x, xm = x;
      xp(i, j) += h;
      xm(i, j) -= h;
      CHECK((problem.cost(xp) - problem.cost(xm)) / (2 * h) == doctest::Approx(g(i, j)).epsilon(1e-7));
    }
  }
  const Matrix v = checks::random_stochastic(4, 4);
  const Matrix hv = problem.euclidean_grad(x + v) - g;
  CHECK((problem.euclidean_hess_vec(v) - hv).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("to_manifold rejects irreversible chains") {
  const StochasticMatrix a = validate_stochastic(checks::random_stochastic(4, 5));
  const ProblemData problem(a, stationary_vector(a));
  const Manifold m(problem.pi_hat());
  try {
    problem.to_manifold(m, a);
    FAIL("expected NotReversible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotReversible);
  }
}

TEST_CASE("detailed_balance_residual on a hand example") {
  Matrix p(2, 2);
  p << 0.5, 0.5, 0.25, 0.75;
  Vector pi(2);
  pi << 0.5, 0.5;
  // |0.5*0.5 - 0.5*0.25| = 0.125
  CHECK(detailed_balance_residual(p, pi) == doctest::Approx(0.125));
}
