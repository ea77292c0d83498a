#include "tiia/errors.hpp"

namespace tiia {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegreeOverflow: return "DegreeOverflow";
    case ErrorCode::DegreeMismatch: return "DegreeMismatch";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::DegenerateSymplectic: return "DegenerateSymplectic";
    case ErrorCode::DegenerateForm: return "DegenerateForm";
    case ErrorCode::NotPrimitive: return "NotPrimitive";
    case ErrorCode::WrongOrientation: return "WrongOrientation";
    case ErrorCode::AnsatzNotPreserved: return "AnsatzNotPreserved";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NoSingularity: return "NoSingularity";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::Schema: return "Schema";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

}  // namespace tiia
