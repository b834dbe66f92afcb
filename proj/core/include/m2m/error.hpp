#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace m2m {

enum class ErrorCode {
  UnparseableLine,
  NonMonotonicSeq,
  NonMonotonicTime,
  EmptyLog,
  LengthMismatch,
  NegativeRtt,
  RoleMismatch,
  ConfigInvalid,
  ZeroRate,
  NegativeComponent,
  Unfittable,
  UnknownPreset,
  EmptySample,
  TooFewSamples,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure in the library surfaces as an m2m::Error. line() is 1-based
// and only meaningful for the parse errors; it is 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace m2m
