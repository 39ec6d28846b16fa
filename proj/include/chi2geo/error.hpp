#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chi2geo {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NonSymmetric,
  NotPositiveSemidefinite,
  NotIdempotent,
  OrderTooLarge,
  OutOfDomain,
  TooFewSamples,
  ConvergenceFailure,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace chi2geo
