#pragma once

#include <stdexcept>
#include <string>

namespace chronoframe {

// Failure classes surfaced by the library. Tests and the CLI dispatch on the
// code rather than the message text.
enum class Err {
  LabelCollision,
  UnknownFactor,
  NotHermitian,
  InvalidDimension,
  InvalidWidth,
  RequiresPropagatorPath,
  NoPhysicalStates,
  NotCommensurate,
  DegenerateNormalization,
  OffGridTime,
  UnsupportedKinematicalForm,
  UnresolvableWidth,
  BadReadoutTime,
  IndistinctBranches,
  OrderNotDefined,
  UnknownField,
  GuardGapViolation,
  ConfigError,
  Internal,
};

const char* err_name(Err code);

class SimError : public std::runtime_error {
 public:
  SimError(Err code, const std::string& what)
      : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}

  Err code() const { return code_; }

 private:
  Err code_;
};

}  // namespace chronoframe
