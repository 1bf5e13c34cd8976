#include "ionmodes/params.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "ionmodes/error.hpp"

namespace ionmodes {
namespace {

using nlohmann::json;

void read_number(const json& obj, const char* key, double& dst, std::string_view prefix) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number()) {
    throw Error(ErrorKind::Config, std::string(prefix) + "." + key + ": expected a number, got " +
                                       it->type_name());
  }
  dst = it->get<double>();
}

}  // namespace

TrapGeometry ModelParams::geometry() const {
  return make_geometry(d0_um * 1e-6, theta_deg * kPi / 180.0);
}

FrequencyModel ModelParams::frequency_model() const {
  return {f_R_kHz, delta_f_kHz, c_per_mV, alpha};
}

CurvatureModel ModelParams::curvature_model(const PhysicalConstants& consts) const {
  return CurvatureModel::from_frequencies(f_R_kHz, delta_f_kHz, alpha, c_per_mV, consts.ion_mass);
}

void ModelParams::validate() const {
  auto bad = [](const char* field, const char* why) {
    throw Error(ErrorKind::Config, std::string("$.") + field + ": " + why);
  };
  if (!std::isfinite(d0_um) || d0_um <= 0.0) bad("d0_um", "must be positive");
  if (!std::isfinite(theta_deg) || theta_deg < 0.0 || theta_deg >= 90.0) {
    bad("theta_deg", "must lie in [0, 90)");
  }
  if (!std::isfinite(f_R_kHz) || f_R_kHz <= 0.0) bad("f_R_kHz", "must be positive");
  if (!std::isfinite(delta_f_kHz) || delta_f_kHz <= 0.0) bad("delta_f_kHz", "must be positive");
  if (!std::isfinite(c_per_mV) || c_per_mV == 0.0) bad("c_per_mV", "must be non-zero");
  if (!std::isfinite(alpha) || alpha <= -1.0 || alpha >= 0.0) bad("alpha", "must lie in (-1, 0)");
}

ModelParams parse_model_params(std::string_view json_text, const ModelParams& base,
                               std::string_view path_prefix) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string(path_prefix) + ": malformed JSON (" + e.what() + ")");
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::Config, std::string(path_prefix) + ": expected an object");
  }
  static constexpr const char* kKeys[] = {"d0_um",       "theta_deg", "f_R_kHz",
                                          "delta_f_kHz", "c_per_mV",  "alpha"};
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || key == k;
    if (!known) {
      throw Error(ErrorKind::Config, std::string(path_prefix) + "." + key + ": unknown key");
    }
  }
  ModelParams p = base;
  read_number(doc, "d0_um", p.d0_um, path_prefix);
  read_number(doc, "theta_deg", p.theta_deg, path_prefix);
  read_number(doc, "f_R_kHz", p.f_R_kHz, path_prefix);
  read_number(doc, "delta_f_kHz", p.delta_f_kHz, path_prefix);
  read_number(doc, "c_per_mV", p.c_per_mV, path_prefix);
  read_number(doc, "alpha", p.alpha, path_prefix);
  p.validate();
  return p;
}

std::string to_json(const ModelParams& p) {
  const json j = {{"d0_um", p.d0_um},         {"theta_deg", p.theta_deg},
                  {"f_R_kHz", p.f_R_kHz},     {"delta_f_kHz", p.delta_f_kHz},
                  {"c_per_mV", p.c_per_mV},   {"alpha", p.alpha}};
  return j.dump(2);
}

}  // namespace ionmodes
