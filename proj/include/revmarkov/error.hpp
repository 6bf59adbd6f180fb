#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace revmarkov {

enum class ErrorCode {
  InvalidArgument,
  NotSquare,
  NegativeEntry,
  RowSumViolation,
  NoConvergence,
  OpenClass,
  MassLeak,
  ShapeMismatch,
  NonPositiveEntry,
  FactorizationFailure,
  NotReversible,
  LineSearchStall,
  SingularConstraints,
  SingularFundamentalMatrix,
  PartialFailure,
  Io,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by malformed or invalid input data rather than a
/// numerical failure inside a solver.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace revmarkov
