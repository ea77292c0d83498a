#pragma once

#include <stdexcept>
#include <string>

namespace tiia {

enum class ErrorCode {
  InvalidArgument,
  DegreeOverflow,
  DegreeMismatch,
  DegenerateMetric,
  DegenerateSymplectic,
  DegenerateForm,
  NotPrimitive,
  WrongOrientation,
  AnsatzNotPreserved,
  StepUnderflow,
  InsufficientData,
  NoSingularity,
  Unsupported,
  Schema,
  Io,
  InvariantViolation,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tiia
