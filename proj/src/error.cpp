#include "aireml/error.hpp"

namespace aireml {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficientX: return "RankDeficientX";
    case ErrorCode::NonPSDKernel: return "NonPSDKernel";
    case ErrorCode::InadmissibleTheta: return "InadmissibleTheta";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SingularKernel: return "SingularKernel";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::SizeCapExceeded: return "SizeCapExceeded";
    case ErrorCode::DegenerateResidual: return "DegenerateResidual";
    case ErrorCode::IndefiniteInformation: return "IndefiniteInformation";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InvalidOptions: return "InvalidOptions";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace aireml
