#include "ionmodes/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <thread>

#include "ionmodes/error.hpp"
#include "ionmodes/random.hpp"

namespace ionmodes {
namespace {

void check_contrast(double contrast) {
  if (!(contrast >= 0.0 && contrast <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "contrast must lie in [0, 1]");
  }
}

void check_delays(std::span<const double> delays) {
  if (delays.empty()) throw Error(ErrorKind::InvalidArgument, "delay list is empty");
  for (double d : delays) {
    if (!std::isfinite(d) || d < 0.0) {
      throw Error(ErrorKind::InvalidArgument, "delays must be finite and non-negative");
    }
  }
}

// Bright probability after free evolution at fixed shims; equivalent to
// evolve_static followed by projection onto site C, with one diagonalisation.
FringeTrace readout(const CurvatureModel& model, ShimPoint s0, const Amplitudes& psi,
                    std::span<const double> delays, double contrast) {
  const ModeSystem ms = eigensystem(model, s0);
  const Eigen::Vector3cd a = ms.eigenvectors.transpose().cast<std::complex<double>>() * psi;
  const double df = model.delta_f_kHz();
  const auto c = static_cast<Eigen::Index>(index(Site::C));
  FringeTrace tr;
  for (double t : delays) {
    std::complex<double> amp = 0.0;
    for (Eigen::Index j = 0; j < 3; ++j) {
      amp += ms.eigenvectors(c, j) * a[j] *
             std::polar(1.0, kTwoPi * df * ms.delta_k[static_cast<std::size_t>(j)] * t);
    }
    tr.delays_ms.push_back(t);
    tr.p_bright.push_back(std::clamp(contrast * (1.0 - std::norm(amp)), 0.0, 1.0));
    tr.std_errors.push_back(0.0);
  }
  return tr;
}

std::array<double, 3> band_populations(const CurvatureModel& model, ShimPoint s0,
                                       const Amplitudes& psi) {
  const ModeSystem ms = eigensystem(model, s0);
  const Eigen::Vector3cd a = ms.eigenvectors.transpose().cast<std::complex<double>>() * psi;
  return {std::norm(a[0]), std::norm(a[1]), std::norm(a[2])};
}

}  // namespace

std::vector<double> uniform_grid(double a, double b, std::size_t n, bool endpoint) {
  std::vector<double> g;
  if (n == 0) return g;
  if (n == 1) return {a};
  const double div = static_cast<double>(endpoint ? n - 1 : n);
  for (std::size_t i = 0; i < n; ++i) g.push_back(a + (b - a) * static_cast<double>(i) / div);
  return g;
}

std::vector<double> default_fringe_delays(const CurvatureModel& model, std::size_t points,
                                          double periods) {
  const double tone = 2.0 * std::sqrt(2.0) * model.delta_f_kHz();
  return uniform_grid(0.0, periods / tone, points, false);
}

InterferenceResult run_interference(const CurvatureModel& model, const PathPair& pair,
                                    double T_ms, std::span<const double> delays_ms,
                                    double contrast, std::optional<double> dt_ms) {
  check_contrast(contrast);
  check_delays(delays_ms);
  const ShimPoint s0 = pair.enclosing.waypoints.front();
  if (!(pair.non_enclosing.waypoints.front() == s0)) {
    throw Error(ErrorKind::InvalidPath, "paths of a pair must share their start point");
  }
  const SinglePhononState psi0 = SinglePhononState::at_site(Site::C);
  const PropagationResult re =
      propagate(psi0, model, pair.enclosing.retimed(T_ms).to_schedule(), dt_ms);
  const PropagationResult rn =
      propagate(psi0, model, pair.non_enclosing.retimed(T_ms).to_schedule(), dt_ms);

  InterferenceResult out;
  out.enclosing = readout(model, s0, re.final_state.amplitudes, delays_ms, contrast);
  out.non_enclosing = readout(model, s0, rn.final_state.amplitudes, delays_ms, contrast);
  out.enclosing.metadata = {std::string(to_string(pair.enclosing.family)) + "-enclosing", T_ms, 0};
  out.non_enclosing.metadata = {std::string(to_string(pair.non_enclosing.family)) + "-non-enclosing",
                                T_ms, 0};
  out.populations_enclosing = band_populations(model, s0, re.final_state.amplitudes);
  out.populations_non_enclosing = band_populations(model, s0, rn.final_state.amplitudes);
  out.norm_drift = std::max(re.norm_drift, rn.norm_drift);
  return out;
}

FringeComparison compare_fringes(const FringeTrace& a, const FringeTrace& b) {
  FringeComparison c;
  c.fit_a = fit_single_sinusoid(a);
  c.fit_b = fit_single_sinusoid(b);
  c.dphi = std::abs(phase_difference(c.fit_a, c.fit_b));
  c.reliable = c.fit_a.converged && c.fit_b.converged && c.fit_a.reliable && c.fit_b.reliable;
  return c;
}

std::vector<SweepPoint> adiabaticity_sweep(const CurvatureModel& model, PathFamily family,
                                           std::span<const double> T_list_ms,
                                           std::span<const double> delays_ms,
                                           const SweepOptions& options) {
  for (double T : T_list_ms) {
    if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "sweep durations must be positive");
  }
  const std::vector<double> delays = delays_ms.empty()
                                         ? default_fringe_delays(model)
                                         : std::vector<double>(delays_ms.begin(), delays_ms.end());
  const PathPair pair = build_path_pair(model, family, 1.0, options.waypoints, options.family);

  std::vector<SweepPoint> out(T_list_ms.size());
  auto run = [&](std::size_t i) {
    SweepPoint& p = out[i];
    p.T_ms = T_list_ms[i];
    try {
      const InterferenceResult r = run_interference(model, pair, p.T_ms, delays, options.contrast);
      const FringeComparison c = compare_fringes(r.enclosing, r.non_enclosing);
      p.dphi = c.dphi;
      if (!c.reliable) {
        p.flagged = true;
        p.note = "fringe fit unreliable";
      }
    } catch (const Error& e) {
      p.flagged = true;
      p.dphi = std::nan("");
      p.note = e.what();
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(options.threads,
                                                      static_cast<unsigned>(out.size())));
  if (nt <= 1) {
    for (std::size_t i = 0; i < out.size(); ++i) run(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < nt; ++k) {
      pool.emplace_back([&, k] {
        for (std::size_t i = k; i < out.size(); i += nt) run(i);
      });
    }
  }
  return out;
}

FringeTrace exchange_trace(const CurvatureModel& model, ShimPoint shims,
                           std::span<const double> delays_ms, double contrast) {
  check_contrast(contrast);
  check_delays(delays_ms);
  FringeTrace tr;
  for (double t : delays_ms) {
    tr.delays_ms.push_back(t);
    tr.p_bright.push_back(
        std::clamp(contrast * (1.0 - return_probability(model, shims, t, Site::C)), 0.0, 1.0));
    tr.std_errors.push_back(0.0);
  }
  tr.metadata.label = "exchange";
  return tr;
}

SpectrumMap synthetic_spectrum(const FrequencyModel& fm, std::span<const double> dV_mV,
                               std::span<const double> df_kHz, double linewidth_kHz, double noise,
                               std::uint64_t seed) {
  if (!(linewidth_kHz > 0.0)) throw Error(ErrorKind::InvalidArgument, "linewidth must be positive");
  if (!(noise >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise must be non-negative");
  if (dV_mV.empty() || df_kHz.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "spectrum grids are empty");
  }
  SpectrumMap map;
  map.dV_mV.assign(dV_mV.begin(), dV_mV.end());
  map.df_kHz.assign(df_kHz.begin(), df_kHz.end());
  map.reference_kHz = fm.f_R_kHz;
  map.response.reserve(dV_mV.size() * df_kHz.size());
  const double w2 = 2.0 * linewidth_kHz * linewidth_kHz;
  for (std::size_t i = 0; i < dV_mV.size(); ++i) {
    const auto f = mode_frequencies(fm, dV_mV[i]);
    std::mt19937_64 rng(derive_seed(seed, i));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double df : df_kHz) {
      double v = 0.0;
      for (double fk : f) {
        const double d = df - (fk - fm.f_R_kHz);
        v += std::exp(-d * d / w2);
      }
      if (noise > 0.0) v += noise * gauss(rng);
      map.response.push_back(v);
    }
  }
  const auto [lo, hi] = std::minmax_element(map.response.begin(), map.response.end());
  const double vmin = *lo;
  const double span = *hi - *lo;
  for (double& v : map.response) v = span > 0.0 ? (v - vmin) / span : 0.0;
  return map;
}

FringeTrace sample_shots(const FringeTrace& ideal, std::size_t shots, std::uint64_t seed) {
  ideal.validate();
  if (shots < 1) throw Error(ErrorKind::InvalidArgument, "shots must be >= 1");
  FringeTrace out = ideal;
  out.shots_per_point = shots;
  out.metadata.seed = seed;
  const double n = static_cast<double>(shots);
  for (std::size_t i = 0; i < ideal.size(); ++i) {
    const double p = ideal.p_bright[i];
    double q = p;
    if (p > 0.0 && p < 1.0) {
      std::mt19937_64 rng(derive_seed(seed, i));
      std::binomial_distribution<std::size_t> bin(shots, p);
      q = static_cast<double>(bin(rng)) / n;
    }
    out.p_bright[i] = q;
    out.std_errors[i] = std::sqrt(q * (1.0 - q) / n);
  }
  return out;
}

}  // namespace ionmodes
