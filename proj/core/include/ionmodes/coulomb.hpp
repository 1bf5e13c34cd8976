#pragma once

#include <span>

#include "ionmodes/constants.hpp"
#include "ionmodes/curvature_model.hpp"
#include "ionmodes/geometry.hpp"

namespace ionmodes {

struct CoulombTerms {
  double offset = 0.0;    // K (9 - 15 cos 2theta) / (8 d0^3), subtracted from k0
  double coupling = 0.0;  // K (11 + 3 cos 2theta) / (8 d0^3)
};

CoulombTerms coulomb_terms(const TrapGeometry& geom, const PhysicalConstants& consts);

// k_offs and delta_k for bare well curvature k0. alpha and the shim gain are
// not fixed by the geometry and are passed through.
CurvatureModel coulomb_curvatures(const TrapGeometry& geom, const PhysicalConstants& consts,
                                  double k0, double alpha = -0.383, double shim_gain = -1.202);

// Bare curvature k0 that places the offset curvature at m (2 pi f_R)^2.
double bare_curvature_for(const TrapGeometry& geom, const PhysicalConstants& consts,
                          double f_R_kHz);

// Harmonic wells plus pairwise Coulomb energy for radial displacements (m).
double potential_energy(const TrapGeometry& geom, const PhysicalConstants& consts, double k0,
                        std::span<const double, 3> displacements);

}  // namespace ionmodes
