#include <doctest.h>

#include "revmarkov/error.hpp"
#include "revmarkov/matrix_io.hpp"

#include <random>
#include <sstream>

using namespace revmarkov;

namespace {

Matrix awkward_values() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(3, 4);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 4; ++j) m(i, j) = u(rng) * std::pow(10.0, static_cast<double>(5 * (j - 2)));
  m(0, 0) = 0.1;
  m(1, 1) = 1.0 / 3.0;
  m(2, 2) = 5e-324;
  return m;
}

}  // namespace

TEST_CASE("round trips are exact in both formats") {
  const Matrix m = awkward_values();
  for (MatrixFormat f : {MatrixFormat::MatrixMarket, MatrixFormat::Csv}) {
    std::stringstream s;
    write_matrix(s, m, f);
    MatrixFormat detected;
    const Matrix back = read_matrix(s, &detected);
    CHECK(detected == f);
    CHECK(back == m);
  }
}

TEST_CASE("Matrix Market array layout is column major") {
  std::istringstream s("%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n2\n3\n4\n");
  const Matrix m = read_matrix(s);
  CHECK(m(1, 0) == 2.0);
  CHECK(m(0, 1) == 3.0);
}

TEST_CASE("malformed files raise Io errors") {
  auto code = [](const std::string& text) {
    std::istringstream s(text);
    try {
      read_matrix(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code("1,2\n3\n") == ErrorCode::Io);
  CHECK(code("1,x\n") == ErrorCode::Io);
  CHECK(code("") == ErrorCode::Io);
  CHECK(code("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n") == ErrorCode::Io);
  CHECK(code("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n") == ErrorCode::Io);
  CHECK(is_input_error(ErrorCode::Io));
}
