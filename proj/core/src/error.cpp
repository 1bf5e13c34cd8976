#include "ionmodes/error.hpp"

namespace ionmodes {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidGeometry: return "invalid-geometry";
    case ErrorKind::UnstableConfiguration: return "unstable-configuration";
    case ErrorKind::NearCollision: return "near-collision";
    case ErrorKind::UnstableMode: return "unstable-mode";
    case ErrorKind::Normalization: return "normalization";
    case ErrorKind::StepSize: return "step-size";
    case ErrorKind::SingularParameter: return "singular-parameter";
    case ErrorKind::NoContour: return "no-contour";
    case ErrorKind::ContourGeometry: return "contour-geometry";
    case ErrorKind::DegeneratePath: return "degenerate-path";
    case ErrorKind::InvalidPath: return "invalid-path";
    case ErrorKind::PhaseUndefined: return "phase-undefined";
    case ErrorKind::RefinePath: return "refine-path";
    case ErrorKind::BranchAssignment: return "branch-assignment";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UnstableConfiguration:
    case ErrorKind::NearCollision:
    case ErrorKind::UnstableMode:
    case ErrorKind::StepSize:
    case ErrorKind::NoContour:
    case ErrorKind::ContourGeometry:
    case ErrorKind::DegeneratePath:
    case ErrorKind::PhaseUndefined:
    case ErrorKind::RefinePath:
    case ErrorKind::BranchAssignment:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace ionmodes
