#include <doctest.h>

#include "geometry_checks.hpp"
#include "revmarkov/generators.hpp"
#include "revmarkov/pipeline.hpp"

using namespace revmarkov;

namespace {

SolveReport run(const StochasticMatrix& a, bool recurse = true) {
  SolveRequest req;
  req.a = a;
  req.recurse_ergodic = recurse;
  return nearest_reversible(req);
}

}  // namespace

TEST_CASE("reversible irreducible input is returned unchanged") {
  Vector pi = Vector::LinSpaced(9, 2.0, 1.0);
  pi /= pi.sum();
  const StochasticMatrix a = mh_reversibilize(validate_stochastic(checks::random_stochastic(9, 2)), pi);
  const SolveReport r = run(a);
  CHECK(r.metrics.rel_frobenius <= 1e-8);
  CHECK(r.metrics.detailed_balance_inf <= 1e-15);
  CHECK(r.warnings.empty());
}

TEST_CASE("transient rows are copied and the recurrent part is reversible") {
  Matrix a = Matrix::Zero(6, 6);
  a.topLeftCorner(3, 3) = checks::random_stochastic(3, 1);
  a.block(3, 3, 2, 2) = checks::random_stochastic(2, 2);
  a.row(5) << 0.1, 0.05, 0.15, 0.2, 0.3, 0.2;
  const StochasticMatrix s = validate_stochastic(a);
  const SolveReport r = run(s);
  CHECK(r.transient == IndexSet{5});
  REQUIRE(r.class_states.size() == 2);
  for (Index j = 0; j < 6; ++j) CHECK(r.p(5, j) == s(5, j));
  CHECK(r.pi[5] == 0.0);
  CHECK(r.metrics.detailed_balance_inf <= 1e-13);
  CHECK(r.metrics.stationarity_inf <= 1e-12);
  CHECK(r.metrics.stochasticity_inf <= 1e-12);
}

TEST_CASE("combined solve over several classes warns") {
  const GeneratedChain g = gen_multi_ergodic(12, 3);
  const SolveReport r = run(g.a, false);
  REQUIRE(g.blocks.size() > 1);
  CHECK(r.classes.size() == 1);
  CHECK(!r.warnings.empty());
  CHECK(r.metrics.detailed_balance_inf <= 1e-13);
}

TEST_CASE("an inconsistent supplied pi is used and flagged") {
  const StochasticMatrix a = validate_stochastic(checks::random_stochastic(5, 4));
  Vector pi = stationary_vector(a).pi();
  pi[0] *= 1.1;
  pi /= pi.sum();
  SolveRequest req;
  req.a = a;
  req.pi = pi;
  const SolveReport r = nearest_reversible(req);
  CHECK(r.pi_supplied);
  CHECK(r.pi_inconsistent);
  CHECK((r.pi - pi).lpNorm<Eigen::Infinity>() <= 1e-16);
  CHECK(r.metrics.detailed_balance_inf <= 1e-13);
  CHECK(r.metrics.stationarity_inf <= 1e-12);
}

TEST_CASE("results do not depend on the worker count") {
  const GeneratedChain g = gen_multi_ergodic(30, 8);
  SolveRequest req;
  req.a = g.a;
  req.threads = 1;
  const SolveReport one = nearest_reversible(req);
  req.threads = 4;
  const SolveReport four = nearest_reversible(req);
  CHECK(one.p.matrix() == four.p.matrix());
}

TEST_CASE("a failing class raises PartialFailure with the others solved") {
  const GeneratedChain g = gen_multi_ergodic(20, 5);
  SolveRequest req;
  req.a = g.a;
  // A manifold positivity floor above every entry makes every non-trivial
  // class fail at its starting point.
  req.manifold.min_entry = 10.0;
  try {
    nearest_reversible(req);
    FAIL("expected an error");
  } catch (const PartialFailureError& e) {
    CHECK(!e.failed_classes().empty());
    CHECK(e.report().classes.size() == g.blocks.size());
    CHECK(e.report().metrics.stochasticity_inf <= 1e-12);
  } catch (const Error& e) {
    // Only possible when a single class exists.
    CHECK(g.blocks.size() == 1);
  }
}

TEST_CASE("a slightly non-uniform pi on a two-cycle still solves") {
  // The projected start cannot be balanced for this pi; the solver starts
  // from pi_hat pi_hat^T instead.
  Matrix c(2, 2);
  c << 0, 1, 1, 0;
  Vector pi(2);
  pi << 0.5 - 6e-13, 0.5 + 6e-13;
  SolveRequest req;
  req.a = validate_stochastic(c);
  req.pi = pi;
  const SolveReport r = nearest_reversible(req);
  CHECK(r.metrics.detailed_balance_inf <= 1e-13);
  CHECK(r.metrics.stochasticity_inf <= 1e-12);
  CHECK((r.p.matrix() - c).norm() <= 1e-3);
}
