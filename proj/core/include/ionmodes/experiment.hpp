#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ionmodes/curvature_model.hpp"
#include "ionmodes/dynamics.hpp"
#include "ionmodes/fit.hpp"
#include "ionmodes/frequency_model.hpp"
#include "ionmodes/paths.hpp"
#include "ionmodes/trace.hpp"

namespace ionmodes {

// n evenly spaced values from a, excluding b when `endpoint` is false.
std::vector<double> uniform_grid(double a, double b, std::size_t n, bool endpoint = true);

// 64 delays over two periods of the 2*sqrt(2)*delta_f tone seen at the start point.
std::vector<double> default_fringe_delays(const CurvatureModel& model, std::size_t points = 64,
                                          double periods = 2.0);

struct InterferenceResult {
  FringeTrace enclosing;
  FringeTrace non_enclosing;
  // Band populations at the end of each traversal, in the start-point eigenbasis.
  std::array<double, 3> populations_enclosing{};
  std::array<double, 3> populations_non_enclosing{};
  double norm_drift = 0.0;
};

// Injects a phonon into site C at the start point, carries it around each path
// in time T and records contrast * (1 - P_return(t)) at the start-point shims.
InterferenceResult run_interference(const CurvatureModel& model, const PathPair& pair,
                                    double T_ms, std::span<const double> delays_ms,
                                    double contrast = 1.0, std::optional<double> dt_ms = {});

struct FringeComparison {
  double dphi = 0.0;  // |wrap(phase_a - phase_b)|, in [0, pi]
  FitResult fit_a;
  FitResult fit_b;
  bool reliable = true;
};

FringeComparison compare_fringes(const FringeTrace& a, const FringeTrace& b);

struct SweepPoint {
  double T_ms = 0.0;
  double dphi = 0.0;
  bool flagged = false;
  std::string note;
};

struct SweepOptions {
  std::size_t waypoints = 400;
  FamilyOptions family;
  double contrast = 1.0;
  unsigned threads = 1;
};

// One interference run per T; delays default to default_fringe_delays().
std::vector<SweepPoint> adiabaticity_sweep(const CurvatureModel& model, PathFamily family,
                                           std::span<const double> T_list_ms,
                                           std::span<const double> delays_ms = {},
                                           const SweepOptions& options = {});

FringeTrace exchange_trace(const CurvatureModel& model, ShimPoint shims,
                           std::span<const double> delays_ms, double contrast = 1.0);

// Unit-height Gaussian lines (standard deviation `linewidth`) at the mode
// frequencies minus f_R, plus Gaussian noise of `noise` line heights, then
// scaled to [0, 1] over the whole map.
SpectrumMap synthetic_spectrum(const FrequencyModel& fm, std::span<const double> dV_mV,
                               std::span<const double> df_kHz, double linewidth_kHz,
                               double noise = 0.05, std::uint64_t seed = 0);

// Binomial shot sampling; point i uses a stream derived from (seed, i).
FringeTrace sample_shots(const FringeTrace& ideal, std::size_t shots, std::uint64_t seed);

}  // namespace ionmodes
