#include "diraccbd/error.hpp"

namespace diraccbd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InsufficientDerivatives: return "InsufficientDerivatives";
    case ErrorCode::BothInputsImpulsive: return "BothInputsImpulsive";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::ImpulseOnInverter: return "ImpulseOnInverter";
    case ErrorCode::DivisionNearZero: return "DivisionNearZero";
    case ErrorCode::ImpulseOnCondition: return "ImpulseOnCondition";
    case ErrorCode::ImpulseAtSwitchingInstant: return "ImpulseAtSwitchingInstant";
    case ErrorCode::ImpulseInNumericalMode: return "ImpulseInNumericalMode";
    case ErrorCode::BadArity: return "BadArity";
    case ErrorCode::UnknownDefinition: return "UnknownDefinition";
    case ErrorCode::RecursiveDefinition: return "RecursiveDefinition";
    case ErrorCode::UnconnectedInput: return "UnconnectedInput";
    case ErrorCode::MultipleDrivers: return "MultipleDrivers";
    case ErrorCode::UnknownPort: return "UnknownPort";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::NonlinearLoop: return "NonlinearLoop";
    case ErrorCode::SingularLoop: return "SingularLoop";
    case ErrorCode::ImpulseInLoop: return "ImpulseInLoop";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MaxOrderExceeded: return "MaxOrderExceeded";
    case ErrorCode::ZenoSuspected: return "ZenoSuspected";
    case ErrorCode::UnknownSignal: return "UnknownSignal";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::TimeGridMismatch: return "TimeGridMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::string& path) {
  std::string out(to_string(code));
  if (!path.empty()) {
    out += " at ";
    out += path;
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

CbdError::CbdError(ErrorCode code, const std::string& message, std::string block_path)
    : std::runtime_error(compose(code, message, block_path)),
      code_(code),
      detail_(message),
      block_path_(std::move(block_path)) {}

CbdError CbdError::at_block(const std::string& path) const {
  if (!block_path_.empty()) return *this;
  return CbdError(code_, detail_, path);
}

}  // namespace diraccbd
