/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace cpapprox {

enum class ErrorCode {
  InvalidArgument = 1,
  Dimension,
  NotPsd,
  SpectralFloorViolation,
  NotAState,
  NotGridFaithful,
  RangeCellTooCoarse,
  Precondition,
  DegenerateCorner,
  PatternScale,
  Cover,
  Convergence,
  Config,
  Internal,
};

const char* error_code_name(ErrorCode code) noexcept;

// Every failure in the library is reported through this type. `witness` holds
// the offending numeric value when there is one (an eigenvalue, a residual),
// `tag` names the violated hypothesis for Precondition errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, double witness = 0.0,
        std::string tag = {})
      : std::runtime_error(message), code_(code), witness_(witness), tag_(std::move(tag)) {}

  ErrorCode code() const noexcept { return code_; }
  double witness() const noexcept { return witness_; }
  const std::string& tag() const noexcept { return tag_; }

 private:
  ErrorCode code_;
  double witness_;
  std::string tag_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message, double witness = 0.0,
                              std::string tag = {}) {
  throw Error(code, message, witness, std::move(tag));
}

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::Dimension, what);
}

}  // namespace cpapprox
