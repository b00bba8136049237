#pragma once

#include <stdexcept>
#include <string>

namespace normot {

enum class ErrorKind {
  InvalidInput,
  Parse,
  Io,
  DegenerateDirection,
  NoCommonFace,
  EmptyCone,
  EmptyInterval,
  EmptyMeasure,
  Infeasible,
  NotOptimal,
  StalePotential,
  InternalConsistency,
  UncoveredCell,
  DegenerateProjection,
  InsufficientData,
};

const char* to_string(ErrorKind kind);

// Validation errors map to CLI exit code 1, everything else to 2.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace normot
