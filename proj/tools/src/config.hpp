#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "ionmodes/params.hpp"
#include "ionmodes/paths.hpp"

namespace ionmodes::cli {

struct SurfacesConfig {
  std::size_t grid = 101;
  double range = 2.0;
};

struct SpectrumConfig {
  double dV_min_mV = -2.5;
  double dV_max_mV = 2.5;
  double dV_step_mV = 0.1;
  double df_min_kHz = -14.0;
  double df_max_kHz = 22.0;
  double df_step_kHz = 4.0 / 11.0;
  double linewidth_kHz = 0.5;
  double noise = 0.05;
};

struct ExchangeConfig {
  double dV_mV = -1.1;
  double duration_ms = 2.0;
  std::size_t points = 400;
  double contrast = 1.0;
  std::size_t shots = 0;
  std::size_t tones = 3;
};

struct BerryConfig {
  std::string family = "canonical";
  double T_us = 780.0;
  std::size_t waypoints = 400;
  std::string profile = "uniform";
  double contrast = 1.0;
  std::size_t shots = 0;
  int loops = 3;
};

struct SweepConfig {
  std::string family = "canonical";
  std::string T_us = "100:1800:100";
  std::size_t waypoints = 400;
  std::string profile = "uniform";
};

struct FitSpectrumConfig {
  std::string input;
  std::size_t window_points = 12;
  double linewidth_kHz = 0.5;
  std::size_t trials = 1000;
};

struct FitFringesConfig {
  std::string input;
  std::string input_b;
  std::size_t tones = 1;
  std::size_t trials = 1000;
};

struct RunConfig {
  ModelParams model;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  SurfacesConfig surfaces;
  SpectrumConfig spectrum;
  ExchangeConfig exchange;
  BerryConfig berry;
  SweepConfig sweep;
  FitSpectrumConfig fit_spectrum;
  FitFringesConfig fit_fringes;
};

// Overlays a JSON document on `base`. Unknown keys and type mismatches raise
// ErrorKind::Config with the offending field path.
RunConfig parse_config(std::string_view json_text, const RunConfig& base = {});
RunConfig load_config(const std::filesystem::path& path, const RunConfig& base = {});

std::string to_json(const RunConfig& config);

// "a:b:step" in microseconds, endpoint included; a single number is a one-point list.
std::vector<double> parse_range_us(std::string_view spec);

}  // namespace ionmodes::cli
