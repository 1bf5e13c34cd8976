#include "ionmodes/geometry.hpp"

#include <cmath>

#include "ionmodes/constants.hpp"
#include "ionmodes/error.hpp"

namespace ionmodes {

void PhysicalConstants::validate() const {
  if (!std::isfinite(elementary_charge) || elementary_charge < 0.0 ||
      !std::isfinite(vacuum_permittivity) || vacuum_permittivity <= 0.0 ||
      !std::isfinite(ion_mass) || ion_mass <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "physical constants must be finite and positive");
  }
}

TrapGeometry make_geometry(double d0_m, double theta_rad) {
  if (!std::isfinite(d0_m) || d0_m <= 0.0) {
    throw Error(ErrorKind::InvalidGeometry, "side length d0 must be finite and positive");
  }
  if (!std::isfinite(theta_rad) || theta_rad < 0.0 || theta_rad >= kPi / 2.0) {
    throw Error(ErrorKind::InvalidGeometry, "tilt angle must lie in [0, pi/2)");
  }
  const double s3 = std::sqrt(3.0);
  const double ct = std::cos(theta_rad);
  const double st = std::sin(theta_rad);

  TrapGeometry g;
  g.d0 = d0_m;
  g.theta = theta_rad;
  g.positions[0] = d0_m / (2.0 * s3) * Vec3(-s3, 1.0, 0.0);
  g.positions[1] = d0_m / s3 * Vec3(0.0, -1.0, 0.0);
  g.positions[2] = d0_m / (2.0 * s3) * Vec3(s3, 1.0, 0.0);
  g.radial_axes[0] = 0.5 * Vec3(-s3 * ct, ct, 2.0 * st);
  g.radial_axes[1] = Vec3(0.0, -ct, st);
  g.radial_axes[2] = 0.5 * Vec3(s3 * ct, ct, 2.0 * st);
  return g;
}

}  // namespace ionmodes
