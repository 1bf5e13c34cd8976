#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ionmodes/error.hpp"

namespace ionmodes::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw Error(ErrorKind::Config, path + ": " + why);
}

class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  void number(const char* key, double& dst) {
    if (const json* v = take(key)) {
      if (!v->is_number()) mismatch(key, "a number", *v);
      dst = v->get<double>();
    }
  }

  template <typename T>
  void count(const char* key, T& dst) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) {
        mismatch(key, "a non-negative integer", *v);
      }
      dst = static_cast<T>(v->get<unsigned long long>());
    }
  }

  void text(const char* key, std::string& dst) {
    if (const json* v = take(key)) {
      if (!v->is_string()) mismatch(key, "a string", *v);
      dst = v->get<std::string>();
    }
  }

  const json* section(const char* key) {
    const json* v = take(key);
    if (v && !v->is_object()) mismatch(key, "an object", *v);
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) fail(path_ + "." + key, "unknown key");
    }
  }

  [[nodiscard]] std::string child(const char* key) const { return path_ + "." + key; }

 private:
  const json* take(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  [[noreturn]] void mismatch(const char* key, const char* expected, const json& v) const {
    fail(child(key), std::string("expected ") + expected + ", got " + v.type_name());
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void check_positive(const std::string& path, double v) {
  if (!std::isfinite(v) || v <= 0.0) fail(path, "must be positive");
}

void check_unit(const std::string& path, double v) {
  if (!(v >= 0.0 && v <= 1.0)) fail(path, "must lie in [0, 1]");
}

void validate(const RunConfig& c) {
  c.model.validate();
  if (c.threads < 1) fail("$.threads", "must be >= 1");
  if (c.surfaces.grid < 2) fail("$.surfaces.grid", "must be >= 2");
  check_positive("$.surfaces.range", c.surfaces.range);
  if (!(c.spectrum.dV_max_mV > c.spectrum.dV_min_mV)) fail("$.spectrum.dV_max_mV", "must exceed dV_min_mV");
  if (!(c.spectrum.df_max_kHz > c.spectrum.df_min_kHz)) fail("$.spectrum.df_max_kHz", "must exceed df_min_kHz");
  check_positive("$.spectrum.dV_step_mV", c.spectrum.dV_step_mV);
  check_positive("$.spectrum.df_step_kHz", c.spectrum.df_step_kHz);
  check_positive("$.spectrum.linewidth_kHz", c.spectrum.linewidth_kHz);
  if (!(c.spectrum.noise >= 0.0)) fail("$.spectrum.noise", "must be non-negative");
  check_positive("$.exchange.duration_ms", c.exchange.duration_ms);
  if (c.exchange.points < 8) fail("$.exchange.points", "must be >= 8");
  check_unit("$.exchange.contrast", c.exchange.contrast);
  if (c.exchange.tones < 1 || c.exchange.tones > 3) fail("$.exchange.tones", "must be 1, 2 or 3");
  check_positive("$.berry.T_us", c.berry.T_us);
  check_unit("$.berry.contrast", c.berry.contrast);
  if (c.berry.loops < 1) fail("$.berry.loops", "must be >= 1");
  if (c.fit_fringes.tones < 1 || c.fit_fringes.tones > 3) fail("$.fit_fringes.tones", "must be 1, 2 or 3");
  if (c.fit_spectrum.window_points < 5) fail("$.fit_spectrum.window_points", "must be >= 5");
  for (const auto* name : {&c.berry.family, &c.sweep.family}) {
    try {
      parse_path_family(*name);
    } catch (const Error& e) {
      fail(name == &c.berry.family ? "$.berry.family" : "$.sweep.family", e.what());
    }
  }
  for (const auto* name : {&c.berry.profile, &c.sweep.profile}) {
    try {
      parse_speed_profile(*name);
    } catch (const Error& e) {
      fail(name == &c.berry.profile ? "$.berry.profile" : "$.sweep.profile", e.what());
    }
  }
  parse_range_us(c.sweep.T_us);
}

}  // namespace

RunConfig parse_config(std::string_view json_text, const RunConfig& base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("$", std::string("malformed JSON (") + e.what() + ")");
  }
  RunConfig c = base;
  Reader top(doc, "$");
  json model = json::object();
  for (const char* key : {"d0_um", "theta_deg", "f_R_kHz", "delta_f_kHz", "c_per_mV", "alpha"}) {
    double scratch = 0.0;
    top.number(key, scratch);
    if (doc.contains(key)) model[key] = doc[key];
  }
  c.model = parse_model_params(model.dump(), c.model, "$");

  std::string out_dir;
  top.text("out_dir", out_dir);
  if (!out_dir.empty()) c.out_dir = out_dir;
  top.count("seed", c.seed);
  top.count("threads", c.threads);

  if (const json* s = top.section("surfaces")) {
    Reader r(*s, top.child("surfaces"));
    r.count("grid", c.surfaces.grid);
    r.number("range", c.surfaces.range);
    r.finish();
  }
  if (const json* s = top.section("spectrum")) {
    Reader r(*s, top.child("spectrum"));
    r.number("dV_min_mV", c.spectrum.dV_min_mV);
    r.number("dV_max_mV", c.spectrum.dV_max_mV);
    r.number("dV_step_mV", c.spectrum.dV_step_mV);
    r.number("df_min_kHz", c.spectrum.df_min_kHz);
    r.number("df_max_kHz", c.spectrum.df_max_kHz);
    r.number("df_step_kHz", c.spectrum.df_step_kHz);
    r.number("linewidth_kHz", c.spectrum.linewidth_kHz);
    r.number("noise", c.spectrum.noise);
    r.finish();
  }
  if (const json* s = top.section("exchange")) {
    Reader r(*s, top.child("exchange"));
    r.number("dV_mV", c.exchange.dV_mV);
    r.number("duration_ms", c.exchange.duration_ms);
    r.count("points", c.exchange.points);
    r.number("contrast", c.exchange.contrast);
    r.count("shots", c.exchange.shots);
    r.count("tones", c.exchange.tones);
    r.finish();
  }
  if (const json* s = top.section("berry")) {
    Reader r(*s, top.child("berry"));
    r.text("family", c.berry.family);
    r.number("T_us", c.berry.T_us);
    r.count("waypoints", c.berry.waypoints);
    r.text("profile", c.berry.profile);
    r.number("contrast", c.berry.contrast);
    r.count("shots", c.berry.shots);
    r.count("loops", c.berry.loops);
    r.finish();
  }
  if (const json* s = top.section("sweep")) {
    Reader r(*s, top.child("sweep"));
    r.text("family", c.sweep.family);
    r.text("T_us", c.sweep.T_us);
    r.count("waypoints", c.sweep.waypoints);
    r.text("profile", c.sweep.profile);
    r.finish();
  }
  if (const json* s = top.section("fit_spectrum")) {
    Reader r(*s, top.child("fit_spectrum"));
    r.text("input", c.fit_spectrum.input);
    r.count("window_points", c.fit_spectrum.window_points);
    r.number("linewidth_kHz", c.fit_spectrum.linewidth_kHz);
    r.count("trials", c.fit_spectrum.trials);
    r.finish();
  }
  if (const json* s = top.section("fit_fringes")) {
    Reader r(*s, top.child("fit_fringes"));
    r.text("input", c.fit_fringes.input);
    r.text("input_b", c.fit_fringes.input_b);
    r.count("tones", c.fit_fringes.tones);
    r.count("trials", c.fit_fringes.trials);
    r.finish();
  }
  top.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) fail(path.string(), "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), base);
}

std::string to_json(const RunConfig& c) {
  json j = json::parse(ionmodes::to_json(c.model));
  j["out_dir"] = c.out_dir.string();
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["surfaces"] = {{"grid", c.surfaces.grid}, {"range", c.surfaces.range}};
  j["spectrum"] = {{"dV_min_mV", c.spectrum.dV_min_mV},   {"dV_max_mV", c.spectrum.dV_max_mV},
                   {"dV_step_mV", c.spectrum.dV_step_mV}, {"df_min_kHz", c.spectrum.df_min_kHz},
                   {"df_max_kHz", c.spectrum.df_max_kHz}, {"df_step_kHz", c.spectrum.df_step_kHz},
                   {"linewidth_kHz", c.spectrum.linewidth_kHz}, {"noise", c.spectrum.noise}};
  j["exchange"] = {{"dV_mV", c.exchange.dV_mV},       {"duration_ms", c.exchange.duration_ms},
                   {"points", c.exchange.points},     {"contrast", c.exchange.contrast},
                   {"shots", c.exchange.shots},       {"tones", c.exchange.tones}};
  j["berry"] = {{"family", c.berry.family},   {"T_us", c.berry.T_us},
                {"waypoints", c.berry.waypoints}, {"profile", c.berry.profile},
                {"contrast", c.berry.contrast}, {"shots", c.berry.shots},
                {"loops", c.berry.loops}};
  j["sweep"] = {{"family", c.sweep.family}, {"T_us", c.sweep.T_us},
                {"waypoints", c.sweep.waypoints}, {"profile", c.sweep.profile}};
  j["fit_spectrum"] = {{"input", c.fit_spectrum.input}, {"window_points", c.fit_spectrum.window_points},
                       {"linewidth_kHz", c.fit_spectrum.linewidth_kHz},
                       {"trials", c.fit_spectrum.trials}};
  j["fit_fringes"] = {{"input", c.fit_fringes.input}, {"input_b", c.fit_fringes.input_b},
                      {"tones", c.fit_fringes.tones}, {"trials", c.fit_fringes.trials}};
  return j.dump(2);
}

std::vector<double> parse_range_us(std::string_view spec) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t colon = spec.find(':', pos);
    const std::string token(spec.substr(pos, colon == std::string_view::npos ? spec.npos : colon - pos));
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      fail("T_us", "cannot parse '" + std::string(spec) + "' as a:b:step");
    }
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  if (parts.size() == 1) {
    if (!(parts[0] > 0.0)) fail("T_us", "durations must be positive");
    return parts;
  }
  if (parts.size() != 3) fail("T_us", "expected a:b:step");
  const double a = parts[0];
  const double b = parts[1];
  const double step = parts[2];
  if (!(a > 0.0) || !(b >= a) || !(step > 0.0)) fail("T_us", "need 0 < a <= b and step > 0");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  if (n > 100000) fail("T_us", "too many points");
  for (std::size_t i = 0; i < n; ++i) out.push_back(a + static_cast<double>(i) * step);
  return out;
}

}  // namespace ionmodes::cli
