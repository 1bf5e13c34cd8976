#pragma once

#include <string>
#include <string_view>

#include "ionmodes/constants.hpp"
#include "ionmodes/curvature_model.hpp"
#include "ionmodes/frequency_model.hpp"
#include "ionmodes/geometry.hpp"

namespace ionmodes {

// Model parameters as loaded from JSON. Defaults are the fitted values.
struct ModelParams {
  double d0_um = 30.0;
  double theta_deg = 19.0;
  double f_R_kHz = 3876.60;
  double delta_f_kHz = 3.299;
  double c_per_mV = -1.202;
  double alpha = -0.383;

  [[nodiscard]] TrapGeometry geometry() const;
  [[nodiscard]] FrequencyModel frequency_model() const;
  [[nodiscard]] CurvatureModel curvature_model(
      const PhysicalConstants& consts = PhysicalConstants{}) const;

  void validate() const;
};

// Parses a JSON object with keys {d0_um, theta_deg, f_R_kHz, delta_f_kHz,
// c_per_mV, alpha}; missing keys keep the values of `base`. Unknown keys and
// type mismatches raise ErrorKind::Config naming the field path.
ModelParams parse_model_params(std::string_view json_text, const ModelParams& base = {},
                               std::string_view path_prefix = "$");

std::string to_json(const ModelParams& params);

}  // namespace ionmodes
