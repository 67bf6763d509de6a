#ifndef MPC_ERROR_H_
#define MPC_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpc {

enum class ErrorCode {
  kInvalidInput,
  kDimension,
  kEmptyDistribution,
  kUndefinedMetric,
  kConfiguration,
  kInferenceUndefined,
  kInfeasible,
  kUnseenEntity,
  kParse,
  kIo,
  kInvariantViolation,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception; `code()` lets
// callers (the CLI in particular) map failures to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mpc

#endif  // MPC_ERROR_H_
