#include "revmarkov/error.hpp"

namespace revmarkov {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::RowSumViolation: return "RowSumViolation";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::OpenClass: return "OpenClass";
    case ErrorCode::MassLeak: return "MassLeak";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::NotReversible: return "NotReversible";
    case ErrorCode::LineSearchStall: return "LineSearchStall";
    case ErrorCode::SingularConstraints: return "SingularConstraints";
    case ErrorCode::SingularFundamentalMatrix: return "SingularFundamentalMatrix";
    case ErrorCode::PartialFailure: return "PartialFailure";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotSquare:
    case ErrorCode::NegativeEntry:
    case ErrorCode::RowSumViolation:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::NotReversible:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

}  // namespace revmarkov
