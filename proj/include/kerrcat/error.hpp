#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kerrcat {

enum class ErrorKind {
  InvalidSpace,
  InvalidInput,
  NotHermitian,
  ParityMismatch,
  IllConditioned,
  NoRobustPoint,
  Truncation,
  AdiabaticityLoss,
  InvalidRamp,
  SchemeInfeasible,
  Stiffness,
  InvalidModel,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSpace: return "invalid-space";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::NotHermitian: return "not-hermitian";
    case ErrorKind::ParityMismatch: return "parity-mismatch";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::NoRobustPoint: return "no-robust-point";
    case ErrorKind::Truncation: return "truncation";
    case ErrorKind::AdiabaticityLoss: return "adiabaticity-loss";
    case ErrorKind::InvalidRamp: return "invalid-ramp";
    case ErrorKind::SchemeInfeasible: return "scheme-infeasible";
    case ErrorKind::Stiffness: return "stiffness";
    case ErrorKind::InvalidModel: return "invalid-model";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace kerrcat
