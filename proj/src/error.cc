#include "mpc/error.h"

namespace mpc {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "invalid input";
    case ErrorCode::kDimension:
      return "dimension mismatch";
    case ErrorCode::kEmptyDistribution:
      return "empty distribution";
    case ErrorCode::kUndefinedMetric:
      return "undefined metric";
    case ErrorCode::kConfiguration:
      return "configuration error";
    case ErrorCode::kInferenceUndefined:
      return "inference undefined";
    case ErrorCode::kInfeasible:
      return "infeasible";
    case ErrorCode::kUnseenEntity:
      return "unseen entity";
    case ErrorCode::kParse:
      return "parse error";
    case ErrorCode::kIo:
      return "i/o error";
    case ErrorCode::kInvariantViolation:
      return "invariant violation";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace mpc
