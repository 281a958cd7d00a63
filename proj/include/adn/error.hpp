#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adn {

enum class ErrorCode {
  // grid
  CycleDetected,
  DisconnectedBus,
  DuplicateLine,
  MissingRoot,
  NonpositiveBase,
  ParseError,
  // power flow
  DimensionMismatch,
  ZeroVoltage,
  NoConvergence,
  SingularJacobian,
  // voltage support
  InvalidBigM,
  NonpositiveZeta,
  NoFeasibleAssignment,
  InvalidParameters,
  // microgrid
  PowerOutOfRange,
  HorizonMismatch,
  // solver
  TooManyBinaries,
  Infeasible,
  // admm
  MissingNeighborMessage,
  SubproblemInfeasible,
  ZeroDenominator,
  AllComponentsSkipped,
  // harness
  InfeasibleStage,
  NrDivergence,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace adn
