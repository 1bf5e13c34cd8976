#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ionmodes {

enum class ErrorKind {
  InvalidArgument,
  InvalidGeometry,
  UnstableConfiguration,
  NearCollision,
  UnstableMode,
  Normalization,
  StepSize,
  SingularParameter,
  NoContour,
  ContourGeometry,
  DegeneratePath,
  InvalidPath,
  PhaseUndefined,
  RefinePath,
  BranchAssignment,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// True for failures of the numerics (as opposed to bad input or configuration).
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ionmodes
