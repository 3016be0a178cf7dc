#include "identlab/error.hpp"

namespace identlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::InvalidP: return "InvalidP";
    case ErrorCode::NoValidR: return "NoValidR";
    case ErrorCode::DegenerateBase: return "DegenerateBase";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::EqualMeans: return "EqualMeans";
    case ErrorCode::EqualValues: return "EqualValues";
    case ErrorCode::GridTooNarrow: return "GridTooNarrow";
    case ErrorCode::NotMatched: return "NotMatched";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::CheckFailed: return "CheckFailed";
  }
  return "Unknown";
}

}  // namespace identlab
