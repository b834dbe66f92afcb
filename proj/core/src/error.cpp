#include "m2m/error.hpp"

namespace m2m {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnparseableLine: return "UnparseableLine";
    case ErrorCode::NonMonotonicSeq: return "NonMonotonicSeq";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NegativeRtt: return "NegativeRtt";
    case ErrorCode::RoleMismatch: return "RoleMismatch";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ZeroRate: return "ZeroRate";
    case ErrorCode::NegativeComponent: return "NegativeComponent";
    case ErrorCode::Unfittable: return "Unfittable";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what, std::size_t line)
    : std::runtime_error(what), code_(code), line_(line) {}

}  // namespace m2m
