#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ionmodes/curvature_model.hpp"
#include "ionmodes/state.hpp"

namespace ionmodes {

// All dynamics run in the frame rotating at f_R. Time is in ms and
// frequencies are in kHz, so 2*pi*f*t is a phase in radians. Eigenmode
// amplitudes advance as exp(+i 2 pi delta_f_j t).

SinglePhononState evolve_static(const SinglePhononState& state, const CurvatureModel& model,
                                ShimPoint shims, double t_ms);

double return_probability(const CurvatureModel& model, ShimPoint shims, double t_ms,
                          Site source);

// Probability of staying on the injection site for two resonant sites with
// pair coupling f_pair: cos^2(2 pi f_pair t).
double two_site_exchange(double f_pair_kHz, double t_ms);

class ShimSchedule {
 public:
  ShimSchedule() = default;
  ShimSchedule(std::vector<double> times_ms, std::vector<ShimPoint> points);

  static ShimSchedule constant(ShimPoint p, double duration_ms);

  [[nodiscard]] double duration_ms() const noexcept;
  [[nodiscard]] bool closed() const noexcept;
  [[nodiscard]] ShimPoint at(double t_ms) const;
  [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
  [[nodiscard]] const std::vector<ShimPoint>& points() const noexcept { return points_; }
  [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }

  // {"duration_ms": T, "points": [[t_ms, sA, sB], ...]}
  [[nodiscard]] std::string to_json() const;
  static ShimSchedule from_json(std::string_view text);

 private:
  std::vector<double> times_;
  std::vector<ShimPoint> points_;
};

struct PropagationResult {
  SinglePhononState final_state;
  double norm_drift = 0.0;          // max |sum |psi|^2 - 1| over all steps
  std::array<double, 3> band_phases{};  // integral of 2 pi delta_f_j dt, rad
  std::size_t steps = 0;
  double dt_ms = 0.0;
};

inline constexpr double kMaxNormDrift = 1e-6;

// Step that keeps the phase advanced per step below `max_phase` rad along the schedule,
// capped at min(1 us, T/4000).
double default_time_step(const CurvatureModel& model, const ShimSchedule& schedule,
                         double max_phase = 0.005);

// Fixed-step RK4 on d psi/dt = +i 2 pi W(t) psi in the site basis, with
// W = delta_f (ones + S(s(t))). Never renormalises.
PropagationResult propagate(const SinglePhononState& state, const CurvatureModel& model,
                            const ShimSchedule& schedule, std::optional<double> dt_ms = {});

}  // namespace ionmodes
