#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aireml {

enum class ErrorCode {
  DimensionMismatch,
  RankDeficientX,
  NonPSDKernel,
  InadmissibleTheta,
  IndexOutOfRange,
  SingularKernel,
  FactorizationFailure,
  SizeCapExceeded,
  DegenerateResidual,
  IndefiniteInformation,
  NoConvergence,
  InvalidOptions,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace aireml
