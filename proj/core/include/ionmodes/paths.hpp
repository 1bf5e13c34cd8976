#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ionmodes/curvature_model.hpp"
#include "ionmodes/dynamics.hpp"
#include "ionmodes/modes.hpp"

namespace ionmodes {

struct SpecialPoints {
  ShimPoint start;  // s_A = s_B = 1/(alpha - 1): site A drops out of band 1
  ShimPoint turn;   // second point on the band-2 level through start
};

SpecialPoints special_points(double alpha);

enum class Orientation { CounterClockwise, Clockwise };

// Points on {delta_k_band = level} found by root-finding along rays fanned
// from the origin between the polar angles of `from` and `to`.
std::vector<ShimPoint> constant_curvature_contour(const CurvatureModel& model, Band band,
                                                  double level, ShimPoint from, ShimPoint to,
                                                  std::size_t n,
                                                  Orientation orientation = Orientation::CounterClockwise);

enum class PathFamily { Canonical, Larger, Smaller, Wavy, MultiLoop, Custom };

std::string_view to_string(PathFamily f) noexcept;
PathFamily parse_path_family(std::string_view name);

enum class SpeedProfile {
  UniformArcLength,  // constant speed per leg with raised-cosine ramps
  LocalAdiabatic,    // dwell time weighted by inter-band coupling over gap^2
};

std::string_view to_string(SpeedProfile p) noexcept;
SpeedProfile parse_speed_profile(std::string_view name);

inline constexpr double kOriginExclusion = 1e-3;

struct ShimPath {
  std::vector<ShimPoint> waypoints;  // closed: front() == back()
  std::vector<double> times_ms;      // one per waypoint, 0 .. duration
  std::vector<std::size_t> leg_ends; // waypoint index closing each leg
  double duration_ms = 0.0;
  PathFamily family = PathFamily::Custom;
  int winding = 0;

  [[nodiscard]] ShimSchedule to_schedule() const;
  // Same geometry and relative timing, stretched to a new duration.
  [[nodiscard]] ShimPath retimed(double duration_ms) const;
  // Reflection s_A <-> s_B of every waypoint.
  [[nodiscard]] ShimPath mirrored() const;

  static ShimPath from_schedule(const ShimSchedule& schedule);
};

struct PathPair {
  ShimPath enclosing;
  ShimPath non_enclosing;
};

struct FamilyOptions {
  double larger_scale = 1.5;
  double smaller_scale = 0.6;
  double taper_fraction = 0.2;  // of each leg, for the scaled families
  double wave_amplitude = 0.1;
  double wave_periods = 5.0;    // over the full loop
  int loops = 3;
  double ramp_fraction = 0.05;  // of each leg, uniform profile only
  SpeedProfile profile = SpeedProfile::UniformArcLength;
};

// n waypoints per leg (n >= 16).
PathPair build_path_pair(const CurvatureModel& model, PathFamily family, double T_ms,
                         std::size_t n, const FamilyOptions& options = {});

// Fraction of leg arc length covered at normalised time tau for a profile that
// ramps up and down with raised-cosine velocity over `ramp` of the leg.
double ramped_progress(double tau, double ramp);
double ramped_progress_inverse(double u, double ramp);

// Trapezoidal integral of 2 pi delta_f_band along the path timing, in rad.
double dynamical_phase(const CurvatureModel& model, const ShimPath& path, Band band);

struct BerryPhase {
  double raw = 0.0;      // arg of the overlap product, in (-pi, pi]
  double snapped = 0.0;  // 0 or pi when raw lies within 1e-6 of either
  bool was_snapped = false;
};

inline constexpr double kMinOverlap = 0.9;

BerryPhase discrete_berry_phase(const CurvatureModel& model, const ShimPath& path, Band band);

int winding_number(const ShimPath& path);
int winding_number(const std::vector<ShimPoint>& closed_polygon);

}  // namespace ionmodes
