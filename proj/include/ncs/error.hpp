#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ncs {

enum class ErrorCode {
  InvalidArgument,
  NonFinite,
  NotReachable,
  WindowOverflow,
  Infeasible,
  SolverStall,
  TooLarge,
  HorizonTooShort,
  CapacityViolation,
  RejectionBudgetExceeded,
  SchemaError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotReachable: return "NotReachable";
    case ErrorCode::WindowOverflow: return "WindowOverflow";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SolverStall: return "SolverStall";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::CapacityViolation: return "CapacityViolation";
    case ErrorCode::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ncs
