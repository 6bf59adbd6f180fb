#include <doctest.h>

#include "revmarkov/error.hpp"
#include "revmarkov/markov_core.hpp"

using namespace revmarkov;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("validate_stochastic rejects malformed matrices") {
  CHECK(code_of([] { validate_stochastic(Matrix::Ones(2, 3) / 3.0); }) == ErrorCode::NotSquare);
  CHECK(code_of([] { validate_stochastic(m2(1.1, -0.1, 0.5, 0.5)); }) == ErrorCode::NegativeEntry);
  CHECK(code_of([] { validate_stochastic(m2(0.5, 0.6, 0.5, 0.5)); }) == ErrorCode::RowSumViolation);
  CHECK(code_of([] { validate_stochastic(m2(NAN, 0.5, 0.5, 0.5)); }) == ErrorCode::NegativeEntry);
}

TEST_CASE("validate_stochastic repairs tiny row-sum drift only") {
  const StochasticMatrix s = validate_stochastic(m2(0.5, 0.5 + 1e-10, 0.25, 0.75));
  CHECK(std::abs(s.matrix().row(0).sum() - 1.0) < 1e-15);
  CHECK(s(1, 0) == 0.25);
}

TEST_CASE("stationary vector of a two-state chain") {
  // pi = (b, a) / (a + b) for [[1-a, a], [b, 1-b]].
  const StochasticMatrix a = validate_stochastic(m2(0.3, 0.7, 0.4, 0.6));
  const StationaryDistribution pi = stationary_vector(a);
  CHECK(pi.pi()[0] == doctest::Approx(4.0 / 11.0).epsilon(1e-13));
  CHECK(pi.pi()[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-13));
  CHECK((pi.pi_hat().cwiseProduct(pi.pi_hat()) - pi.pi()).norm() < 1e-15);
}

TEST_CASE("stationary vector of a periodic chain needs damping") {
  Matrix c = Matrix::Zero(3, 3);
  c(0, 1) = c(1, 2) = c(2, 0) = 1.0;
  // Start away from uniform through a reducible-looking but periodic cycle.
  const StationaryDistribution pi = stationary_vector(validate_stochastic(c));
  for (Index i = 0; i < 3; ++i) CHECK(pi.pi()[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  Matrix bip(4, 4);
  bip << 0, 0, 0.5, 0.5, 0, 0, 0.2, 0.8, 0.3, 0.7, 0, 0, 0.6, 0.4, 0, 0;
  const StochasticMatrix b = validate_stochastic(bip);
  const StationaryDistribution pb = stationary_vector(b);
  CHECK((b.matrix().transpose() * pb.pi() - pb.pi()).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("slowly mixing chains get a larger iteration budget on retry") {
  // Two states swapping with probability 1e-3: second eigenvalue 1 - 3e-3,
  // far beyond the default 100 n iterations at tol 1e-13.
  const StochasticMatrix a = validate_stochastic(m2(1 - 1e-3, 1e-3, 2e-3, 1 - 2e-3));
  CHECK_THROWS_AS(stationary_vector(a), Error);
  const StationaryDistribution pi = stationary_vector_retrying(a);
  // Error in pi is the residual tolerance over the spectral gap.
  CHECK(pi.pi()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("transient detection and ergodic classes") {
  // State 2 leaks into both closed classes {0,1} and {3}.
  Matrix a(4, 4);
  a << 0.5, 0.5, 0, 0,  //
      0.2, 0.8, 0, 0,   //
      0.1, 0.2, 0.3, 0.4, //
      0, 0, 0, 1;
  const StochasticMatrix s = validate_stochastic(a);
  const StationaryDistribution pi = stationary_vector(s);
  const IndexSet transient = detect_transient(pi, default_transient_tol(4));
  CHECK(transient == IndexSet{2});
  const ErgodicDecomposition dec = ergodic_classes(s, complement(transient, 4));
  REQUIRE(dec.classes.size() == 2);
  CHECK(dec.classes[0] == IndexSet{0, 1});
  CHECK(dec.classes[1] == IndexSet{3});
  CHECK(dec.permutation == IndexSet{0, 1, 3, 2});
  CHECK(dec.class_pis[0].pi()[0] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));

  // Treating the transient state as recurrent leaves an open class.
  CHECK(code_of([&] { ergodic_classes(s, IndexSet{0, 1, 2, 3}); }) == ErrorCode::OpenClass);
  CHECK(code_of([&] { restrict_to(s, IndexSet{2, 3}); }) == ErrorCode::MassLeak);
}

TEST_CASE("reassemble copies transient rows bit for bit") {
  Matrix a(3, 3);
  a << 0.6, 0.4, 0, 0.3, 0.7, 0, 0.1 / 3.0, 0.2 / 7.0, 0;
  a(2, 2) = 1.0 - a(2, 0) - a(2, 1);
  const StochasticMatrix s = validate_stochastic(a);
  const std::vector<IndexSet> blocks{{0, 1}};
  const std::vector<Matrix> solved{m2(0.5, 0.5, 0.5, 0.5)};
  const StochasticMatrix p = reassemble(s, blocks, IndexSet{2}, solved);
  for (Index j = 0; j < 3; ++j) CHECK(p(2, j) == a(2, j));
  CHECK(p(0, 1) == 0.5);
  CHECK(p(0, 2) == 0.0);
}

TEST_CASE("StationaryDistribution normalizes and rejects negatives") {
  Vector v(3);
  v << 1, 1, 2;
  const StationaryDistribution pi(v);
  CHECK(pi.pi()[2] == 0.5);
  CHECK(pi.support(0.3) == IndexSet{2});
  v[0] = -1;
  CHECK(code_of([&] { StationaryDistribution bad(v); }) == ErrorCode::InvalidArgument);
}
