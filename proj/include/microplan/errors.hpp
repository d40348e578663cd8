#pragma once

#include <stdexcept>
#include <string>

namespace microplan {

enum class ErrorCode {
  ParseError,        // malformed case file / CSV
  SchemaError,       // missing, extra, or structurally invalid fields
  UnitError,         // value outside its physical/unit range
  ZeroImpedance,     // r^2 + x^2 == 0
  StageError,        // stage-2 build requested without stage-1 voltages
  ModelSizeError,    // period x bus budget exceeded
  IntegralityError,  // binary away from {0,1} beyond tolerance
  MismatchError,     // recomputed costs disagree with solver objective
  TooManyBinaries,   // brute-force enumeration refused
  Diverged,          // AC power flow did not converge
  IslandedBus,       // connected component without a slack bus
  NumericalFailure,  // LP could not reach residual targets
  IoError,           // filesystem problem
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace microplan
