#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlagg {

enum class ErrorKind {
  InvalidArgument,
  NonZeroMean,
  SolverDivergence,
  OutOfDomain,
  NoConvergence,
  KernelTooWide,
  NewtonDivergence,
  CflViolation,
  ZeroInput,
  MissingKey,
  InvalidValue,
  UnknownKey,
  CorruptHeader,
  SizeMismatch,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Raised by the time loop; carries the step at which a sub-solver failed.
class StepError : public Error {
public:
  StepError(const Error& cause, long step)
      : Error(cause.kind(), "step " + std::to_string(step) + ": " + cause.what()), step_(step) {}

  long step() const noexcept { return step_; }

private:
  long step_;
};

#define NLAGG_REQUIRE(cond, kind, msg)                                                   \
  do {                                                                                   \
    if (!(cond)) throw ::nlagg::Error((kind), (msg));                                    \
  } while (0)

}  // namespace nlagg
