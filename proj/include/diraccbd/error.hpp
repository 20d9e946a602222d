#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace diraccbd {

enum class ErrorCode {
  // signal algebra
  InsufficientDerivatives,
  // block semantics
  BothInputsImpulsive,
  InsufficientHistory,
  ImpulseOnInverter,
  DivisionNearZero,
  ImpulseOnCondition,
  ImpulseAtSwitchingInstant,
  ImpulseInNumericalMode,
  BadArity,
  // model structure
  UnknownDefinition,
  RecursiveDefinition,
  UnconnectedInput,
  MultipleDrivers,
  UnknownPort,
  InvalidParameter,
  DuplicateName,
  // algebraic loops
  NonlinearLoop,
  SingularLoop,
  ImpulseInLoop,
  // engine
  InvalidConfig,
  MaxOrderExceeded,
  ZenoSuspected,
  UnknownSignal,
  // dsl
  SyntaxError,
  // analysis / io
  TimeGridMismatch,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code plus, for engine failures, the
/// hierarchical path of the offending block.
class CbdError : public std::runtime_error {
 public:
  CbdError(ErrorCode code, const std::string& message, std::string block_path = {});

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string& block_path() const noexcept { return block_path_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

  /// Same error, re-tagged with the block that raised it.
  [[nodiscard]] CbdError at_block(const std::string& path) const;

 private:
  ErrorCode code_;
  std::string detail_;
  std::string block_path_;
};

}  // namespace diraccbd
