#pragma once

#include <array>

#include "ionmodes/curvature_model.hpp"

namespace ionmodes {

// Mode frequencies versus the voltage on site A's shim electrode.
struct FrequencyModel {
  double f_R_kHz = 3876.60;
  double delta_f_kHz = 3.299;
  double c_per_mV = -1.202;
  double alpha = -0.383;

  static FrequencyModel from(const CurvatureModel& model);
  [[nodiscard]] CurvatureModel to_curvature_model() const;

  void validate() const;
};

// Ascending eigenvalues of f_R I + delta_f (ones + S(c dV_A, 0)), in kHz.
std::array<double, 3> mode_frequencies(const FrequencyModel& fm, double dV_A_mV);

// The (0,1,-1) mode, whose frequency is exactly linear in dV_A.
double linear_branch_frequency(const FrequencyModel& fm, double dV_A_mV) noexcept;
double linear_branch_slope(const FrequencyModel& fm) noexcept;

}  // namespace ionmodes
