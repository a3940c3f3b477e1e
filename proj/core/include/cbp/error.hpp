#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbp {

enum class ErrorCode {
  InvalidArgument,
  TailTooHeavy,
  UnsupportedMoment,
  OutsideSimplex,
  Unidentifiable,
  AllZero,
  EmptyIndexSet,
  MissingProgenitors,
  ZeroPopulation,
  SupportOverflow,
  NumericalInstability,
  ImpossibleTransition,
  DegenerateIncrement,
  MissingMoment,
  InvalidMixing,
  NotLinearlyDivisible,
  SchemaViolation,
  BootstrapFailure,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every recoverable failure in the library is reported through this type; the
// code distinguishes the failure classes callers are expected to branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace cbp
