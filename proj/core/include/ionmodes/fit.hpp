#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ionmodes/trace.hpp"

namespace ionmodes {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> uncertainties;
  double residual_norm = 0.0;
  bool converged = false;
  bool reliable = true;
  std::size_t iterations = 0;
  std::vector<std::string> notes;

  void set(std::string name, double value, double uncertainty = 0.0);
  [[nodiscard]] bool has(std::string_view name) const noexcept;
  [[nodiscard]] double value(std::string_view name) const;
  [[nodiscard]] double uncertainty(std::string_view name) const;
};

// ---- damped least squares ----

// Fills residual r (size m) and Jacobian J (m x p) at parameters p.
using ResidualFn =
    std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& J)>;

struct LmOptions {
  std::size_t max_iterations = 200;
  double relative_tolerance = 1e-10;
};

struct LmOutcome {
  Eigen::VectorXd parameters;
  Eigen::VectorXd standard_errors;
  Eigen::MatrixXd covariance;
  double rss = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

LmOutcome levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd p0, std::size_t residuals,
                              const LmOptions& options = {});

// ---- peak and sinusoid fits ----

// offset + amplitude * exp(-(x - center)^2 / (2 width^2))
FitResult fit_gaussian_peak(std::span<const double> x, std::span<const double> y);

// offset + sum_k amplitude_k cos(2 pi frequency_k t + phase_k), tones sorted by
// frequency. Parameter names: offset, amplitude_k, frequency_k, phase_k (k = 1..K).
FitResult fit_sinusoid_sum(const FringeTrace& trace, std::size_t K);

// K = 1 variant; amplitude >= 0 and phase in (-pi, pi]. Flags the phase as
// unreliable when the amplitude is consistent with zero.
FitResult fit_single_sinusoid(const FringeTrace& trace);

// Wraps into (-pi, pi].
double wrap_phase(double phi) noexcept;
double phase_difference(const FitResult& a, const FitResult& b);

// ---- spectrum analysis ----

struct PeakRow {
  double dV_mV = 0.0;
  std::array<double, 3> centers_kHz{};  // ascending
};

struct PeakExtractionOptions {
  std::size_t window_points = 12;
  double linewidth_kHz = 0.5;
  // Peaks closer than this are not resolved and the column is dropped;
  // unset means half the window span plus two linewidths.
  std::optional<double> min_separation_kHz;
  double relative_height = 0.5;  // of the column maximum
};

std::vector<PeakRow> extract_peak_centers(const SpectrumMap& map,
                                          const PeakExtractionOptions& options = {});

// Two-stage linear extraction of {f_R, delta_f, c, alpha} from the three
// sorted mode frequencies per voltage.
FitResult extract_model_params(std::span<const PeakRow> rows);

// ---- bootstrap ----

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  [[nodiscard]] double width() const noexcept { return hi - lo; }
};

struct BootstrapResult {
  std::map<std::string, Interval> ci68;
  std::map<std::string, Interval> ci95;
  std::size_t trials = 0;
  std::size_t failures = 0;
  bool degraded = false;
  std::vector<std::string> warnings;
};

// Refits `fitter` on `trials` resamples (with replacement) of n_points indices.
// Trials use seeds derived from (seed, trial) and may run on several threads.
BootstrapResult bootstrap_ci(std::size_t n_points,
                             const std::function<FitResult(std::span<const std::size_t>)>& fitter,
                             std::size_t trials, std::uint64_t seed, unsigned threads = 1);

// Resampled copy of a trace (for fitters operating on FringeTrace).
FringeTrace resample(const FringeTrace& trace, std::span<const std::size_t> indices);

// {parameters, uncertainties, ci68, ci95, converged, residual}
std::string fit_report_json(const FitResult& fit, const BootstrapResult* bootstrap = nullptr);

}  // namespace ionmodes
