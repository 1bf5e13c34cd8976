#include "ionmodes/curvature_model.hpp"

#include <cmath>
#include <string>

#include "ionmodes/error.hpp"

namespace ionmodes {

ShimPoint ShimPoint::from_voltage(double dV_A_mV, double dV_B_mV, double c_per_mV) {
  return {c_per_mV * dV_A_mV, c_per_mV * dV_B_mV};
}

double ShimPoint::radius() const noexcept { return std::hypot(s_A, s_B); }

void ShimPoint::validate(double range) const {
  if (!std::isfinite(s_A) || !std::isfinite(s_B)) {
    throw Error(ErrorKind::InvalidArgument, "shim values must be finite");
  }
  if (std::abs(s_A) > range || std::abs(s_B) > range) {
    throw Error(ErrorKind::InvalidArgument,
                "shim values exceed the configured range " + std::to_string(range));
  }
}

CurvatureModel CurvatureModel::from_frequencies(double f_R_kHz, double delta_f_kHz, double alpha,
                                                double shim_gain_per_mV, double ion_mass_kg) {
  CurvatureModel m;
  m.alpha = alpha;
  m.shim_gain = shim_gain_per_mV;
  m.f_R_kHz = f_R_kHz;
  m.ion_mass = ion_mass_kg;
  const double w = kTwoPi * f_R_kHz * 1e3;
  m.k_offs = ion_mass_kg * w * w;
  m.delta_k = delta_f_kHz * 1e3 * kTwoPi * 2.0 * ion_mass_kg * w;
  m.validate();
  return m;
}

double CurvatureModel::omega_R() const noexcept { return std::sqrt(k_offs / ion_mass); }

double CurvatureModel::delta_f_kHz() const noexcept {
  return delta_k / (2.0 * ion_mass * omega_R()) / kTwoPi * 1e-3;
}

void CurvatureModel::validate() const {
  if (!(k_offs > 0.0) || !std::isfinite(k_offs)) {
    throw Error(ErrorKind::UnstableConfiguration, "k_offs must be finite and positive");
  }
  if (!(delta_k > 0.0) || !std::isfinite(delta_k)) {
    throw Error(ErrorKind::InvalidArgument, "delta_k must be finite and positive");
  }
  if (!(alpha > -1.0 && alpha < 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in (-1, 0)");
  }
  if (!std::isfinite(shim_gain) || shim_gain == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "shim gain must be finite and non-zero");
  }
  if (!(ion_mass > 0.0) || !std::isfinite(f_R_kHz) || f_R_kHz <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "ion mass and f_R must be positive");
  }
}

Eigen::Vector3d shim_diagonal(double alpha, ShimPoint s) noexcept {
  return {s.s_A + alpha * s.s_B, s.s_B + alpha * s.s_A, alpha * (s.s_A + s.s_B)};
}

Eigen::Matrix3d coupling_matrix(double alpha, ShimPoint s) noexcept {
  Eigen::Matrix3d m = Eigen::Matrix3d::Ones();
  m.diagonal() += shim_diagonal(alpha, s);
  return m;
}

Eigen::Matrix3d build_hessian(const CurvatureModel& model, ShimPoint s) {
  if (!std::isfinite(s.s_A) || !std::isfinite(s.s_B)) {
    throw Error(ErrorKind::InvalidArgument, "shim values must be finite");
  }
  return model.k_offs * Eigen::Matrix3d::Identity() +
         model.delta_k * coupling_matrix(model.alpha, s);
}

double curvature_to_frequency(const CurvatureModel& model, double delta_k_N_per_m) {
  if (!(model.k_offs + delta_k_N_per_m > 0.0)) {
    throw Error(ErrorKind::UnstableMode, "total mode curvature is not positive");
  }
  return delta_k_N_per_m / (2.0 * model.ion_mass * model.omega_R()) / kTwoPi * 1e-3;
}

double curvature_to_frequency_exact(const CurvatureModel& model, double delta_k_N_per_m) {
  const double total = model.k_offs + delta_k_N_per_m;
  if (!(total > 0.0)) {
    throw Error(ErrorKind::UnstableMode, "total mode curvature is not positive");
  }
  return (std::sqrt(total / model.ion_mass) - model.omega_R()) / kTwoPi * 1e-3;
}

}  // namespace ionmodes
