#pragma once

#include <numbers>

namespace ionmodes {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018 values.
inline constexpr double kElementaryCharge = 1.602176634e-19;    // C
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;     // kg
inline constexpr double kBeryllium9MassU = 9.012182;

struct PhysicalConstants {
  double elementary_charge = kElementaryCharge;
  double vacuum_permittivity = kVacuumPermittivity;
  double ion_mass = kBeryllium9MassU * kAtomicMassUnit;

  // q^2 / (4 pi eps0), in J*m.
  [[nodiscard]] double coulomb_constant() const noexcept {
    return elementary_charge * elementary_charge / (4.0 * kPi * vacuum_permittivity);
  }

  // Throws InvalidArgument unless all fields are finite and positive
  // (a zero charge is accepted to switch the interaction off).
  void validate() const;
};

}  // namespace ionmodes
