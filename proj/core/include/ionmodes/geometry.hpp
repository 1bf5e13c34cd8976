#pragma once

#include <array>

#include <Eigen/Core>

namespace ionmodes {

using Vec3 = Eigen::Vector3d;

enum class Site { A = 0, B = 1, C = 2 };

inline constexpr std::size_t index(Site s) noexcept { return static_cast<std::size_t>(s); }

// Equilateral three-site array of side d0 in the xy-plane, centred on the
// origin. Each radial axis is tilted out of the plane by theta.
struct TrapGeometry {
  double d0 = 0.0;     // m
  double theta = 0.0;  // rad
  std::array<Vec3, 3> positions{};
  std::array<Vec3, 3> radial_axes{};
};

TrapGeometry make_geometry(double d0_m, double theta_rad);

}  // namespace ionmodes
