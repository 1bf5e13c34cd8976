#include "ionmodes/frequency_model.hpp"

#include <cmath>

#include "ionmodes/error.hpp"
#include "ionmodes/modes.hpp"

namespace ionmodes {

FrequencyModel FrequencyModel::from(const CurvatureModel& model) {
  return {model.f_R_kHz, model.delta_f_kHz(), model.shim_gain, model.alpha};
}

CurvatureModel FrequencyModel::to_curvature_model() const {
  return CurvatureModel::from_frequencies(f_R_kHz, delta_f_kHz, alpha, c_per_mV);
}

void FrequencyModel::validate() const {
  if (!(delta_f_kHz > 0.0) || !std::isfinite(delta_f_kHz) || !std::isfinite(f_R_kHz) ||
      !std::isfinite(c_per_mV) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::InvalidArgument, "frequency model parameters must be finite, delta_f > 0");
  }
}

std::array<double, 3> mode_frequencies(const FrequencyModel& fm, double dV_A_mV) {
  if (!std::isfinite(dV_A_mV)) {
    throw Error(ErrorKind::InvalidArgument, "dV_A must be finite");
  }
  const ModeSystem ms = eigensystem(fm.alpha, ShimPoint{fm.c_per_mV * dV_A_mV, 0.0});
  std::array<double, 3> f{};
  for (std::size_t i = 0; i < 3; ++i) f[i] = fm.f_R_kHz + fm.delta_f_kHz * ms.delta_k[i];
  return f;
}

double linear_branch_frequency(const FrequencyModel& fm, double dV_A_mV) noexcept {
  return fm.f_R_kHz + linear_branch_slope(fm) * dV_A_mV;
}

double linear_branch_slope(const FrequencyModel& fm) noexcept {
  return fm.delta_f_kHz * fm.alpha * fm.c_per_mV;
}

}  // namespace ionmodes
