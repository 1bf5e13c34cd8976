#pragma once

#include <Eigen/Core>

#include "ionmodes/constants.hpp"

namespace ionmodes {

inline constexpr double kDefaultShimRange = 5.0;

struct ShimPoint {
  double s_A = 0.0;
  double s_B = 0.0;

  // Shim set through electrode voltages (mV) with gain c (1/mV).
  static ShimPoint from_voltage(double dV_A_mV, double dV_B_mV, double c_per_mV);

  [[nodiscard]] ShimPoint swapped() const noexcept { return {s_B, s_A}; }
  [[nodiscard]] double radius() const noexcept;

  // Throws InvalidArgument for non-finite values or |s| beyond range.
  void validate(double range = kDefaultShimRange) const;

  friend bool operator==(const ShimPoint&, const ShimPoint&) = default;
};

struct CurvatureModel {
  double k_offs = 0.0;          // N/m
  double delta_k = 0.0;         // N/m
  double alpha = -0.383;
  double shim_gain = -1.202;    // 1/mV
  double f_R_kHz = 0.0;
  double ion_mass = kBeryllium9MassU * kAtomicMassUnit;  // kg

  // Model whose curvatures reproduce the given frequency-domain parameters.
  static CurvatureModel from_frequencies(double f_R_kHz, double delta_f_kHz, double alpha,
                                         double shim_gain_per_mV,
                                         double ion_mass_kg = kBeryllium9MassU * kAtomicMassUnit);

  [[nodiscard]] double omega_R() const noexcept;  // rad/s
  [[nodiscard]] double delta_f_kHz() const noexcept;

  void validate() const;
};

// diag(s_A + a s_B, s_B + a s_A, a (s_A + s_B))
Eigen::Vector3d shim_diagonal(double alpha, ShimPoint s) noexcept;

// ones + shim_diagonal, the Hessian minus k_offs*I in units of delta_k.
Eigen::Matrix3d coupling_matrix(double alpha, ShimPoint s) noexcept;

Eigen::Matrix3d build_hessian(const CurvatureModel& model, ShimPoint s);

// Linearised shift delta_k / (2 m w_R) / (2 pi), in kHz.
double curvature_to_frequency(const CurvatureModel& model, double delta_k_N_per_m);
// (sqrt((k_offs + delta_k)/m) - w_R) / (2 pi), in kHz.
double curvature_to_frequency_exact(const CurvatureModel& model, double delta_k_N_per_m);

}  // namespace ionmodes
