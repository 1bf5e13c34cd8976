#include "ionmodes/coulomb.hpp"

#include <cmath>
#include <string>

#include "ionmodes/error.hpp"

namespace ionmodes {

CoulombTerms coulomb_terms(const TrapGeometry& geom, const PhysicalConstants& consts) {
  const double K = consts.coulomb_constant();
  const double c2t = std::cos(2.0 * geom.theta);
  const double d3 = geom.d0 * geom.d0 * geom.d0;
  return {K * (9.0 - 15.0 * c2t) / (8.0 * d3), K * (11.0 + 3.0 * c2t) / (8.0 * d3)};
}

CurvatureModel coulomb_curvatures(const TrapGeometry& geom, const PhysicalConstants& consts,
                                  double k0, double alpha, double shim_gain) {
  consts.validate();
  const CoulombTerms t = coulomb_terms(geom, consts);
  CurvatureModel m;
  m.k_offs = k0 - t.offset;
  m.delta_k = t.coupling;
  m.alpha = alpha;
  m.shim_gain = shim_gain;
  m.ion_mass = consts.ion_mass;
  if (!(m.k_offs > 0.0)) {
    throw Error(ErrorKind::UnstableConfiguration,
                "offset curvature k_offs = " + std::to_string(m.k_offs) + " N/m is not positive");
  }
  m.f_R_kHz = std::sqrt(m.k_offs / m.ion_mass) / kTwoPi * 1e-3;
  return m;
}

double bare_curvature_for(const TrapGeometry& geom, const PhysicalConstants& consts,
                          double f_R_kHz) {
  const double w = kTwoPi * f_R_kHz * 1e3;
  return consts.ion_mass * w * w + coulomb_terms(geom, consts).offset;
}

double potential_energy(const TrapGeometry& geom, const PhysicalConstants& consts, double k0,
                        std::span<const double, 3> displacements) {
  for (double d : displacements) {
    if (!std::isfinite(d) || std::abs(d) >= geom.d0 / 10.0) {
      throw Error(ErrorKind::InvalidArgument, "displacements must be finite and below d0/10");
    }
  }
  std::array<Vec3, 3> r;
  double harmonic = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    r[i] = geom.positions[i] + displacements[i] * geom.radial_axes[i];
    harmonic += 0.5 * k0 * displacements[i] * displacements[i];
  }
  const double K = consts.coulomb_constant();
  double coulomb = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const double d = (r[i] - r[j]).norm();
      if (d < geom.d0 / 100.0) {
        throw Error(ErrorKind::NearCollision, "pair distance below d0/100");
      }
      coulomb += K / d;
    }
  }
  return harmonic + coulomb;
}

}  // namespace ionmodes
