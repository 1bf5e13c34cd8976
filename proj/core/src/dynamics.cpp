#include "ionmodes/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <nlohmann/json.hpp>

#include "ionmodes/error.hpp"

namespace ionmodes {
namespace {

using cd = std::complex<double>;

void require_finite_time(double t_ms) {
  if (!std::isfinite(t_ms)) throw Error(ErrorKind::InvalidArgument, "time must be finite");
}

}  // namespace

SinglePhononState evolve_static(const SinglePhononState& state, const CurvatureModel& model,
                                ShimPoint shims, double t_ms) {
  state.require_normalized();
  require_finite_time(t_ms);
  const ModeSystem ms = eigensystem(model, shims);
  const bool in_eigen = state.basis == Basis::Eigen123;
  SinglePhononState e = in_eigen ? to_eigen_basis(state, ms) : change_basis(state, ms);
  const double df = model.delta_f_kHz();
  for (Eigen::Index j = 0; j < 3; ++j) {
    e.amplitudes[j] *= std::polar(1.0, kTwoPi * df * ms.delta_k[static_cast<std::size_t>(j)] * t_ms);
  }
  return in_eigen ? e : change_basis(e, ms);
}

double return_probability(const CurvatureModel& model, ShimPoint shims, double t_ms,
                          Site source) {
  require_finite_time(t_ms);
  const ModeSystem ms = eigensystem(model, shims);
  const auto row = static_cast<Eigen::Index>(index(source));

  // Group degenerate bands so each term is a projector weight, independent of gauge.
  std::array<double, 3> w{};
  std::array<double, 3> f{};
  std::size_t groups = 0;
  const double df = model.delta_f_kHz();
  for (std::size_t k = 0; k < 3; ++k) {
    const double weight = std::pow(ms.eigenvectors(row, static_cast<Eigen::Index>(k)), 2);
    if (groups > 0 && ms.delta_k[k] - ms.delta_k[k - 1] < kDegeneracyTolerance) {
      w[groups - 1] += weight;
    } else {
      w[groups] = weight;
      f[groups] = df * ms.delta_k[k];
      ++groups;
    }
  }
  double p = 0.0;
  for (std::size_t k = 0; k < groups; ++k) {
    p += w[k] * w[k];
    for (std::size_t l = k + 1; l < groups; ++l) {
      p += 2.0 * w[k] * w[l] * std::cos(kTwoPi * (f[l] - f[k]) * t_ms);
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

double two_site_exchange(double f_pair_kHz, double t_ms) {
  require_finite_time(t_ms);
  const double c = std::cos(kTwoPi * f_pair_kHz * t_ms);
  return c * c;
}

ShimSchedule::ShimSchedule(std::vector<double> times_ms, std::vector<ShimPoint> points)
    : times_(std::move(times_ms)), points_(std::move(points)) {
  if (times_.size() != points_.size() || times_.size() < 2) {
    throw Error(ErrorKind::InvalidArgument,
                "schedule needs at least two samples with matching time and shim lists");
  }
  if (times_.front() != 0.0) {
    throw Error(ErrorKind::InvalidArgument, "schedule must start at t = 0");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || (i > 0 && !(times_[i] > times_[i - 1]))) {
      throw Error(ErrorKind::InvalidArgument, "schedule times must be finite and strictly increasing");
    }
    points_[i].validate();
  }
}

ShimSchedule ShimSchedule::constant(ShimPoint p, double duration_ms) {
  if (!(duration_ms > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "duration must be positive");
  }
  return ShimSchedule({0.0, duration_ms}, {p, p});
}

double ShimSchedule::duration_ms() const noexcept { return times_.empty() ? 0.0 : times_.back(); }

bool ShimSchedule::closed() const noexcept {
  return !points_.empty() && points_.front() == points_.back();
}

ShimPoint ShimSchedule::at(double t_ms) const {
  if (times_.empty()) throw Error(ErrorKind::InvalidArgument, "empty schedule");
  if (t_ms <= times_.front()) return points_.front();
  if (t_ms >= times_.back()) return points_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t_ms);
  const auto i = static_cast<std::size_t>(it - times_.begin());
  const double u = (t_ms - times_[i - 1]) / (times_[i] - times_[i - 1]);
  const ShimPoint& a = points_[i - 1];
  const ShimPoint& b = points_[i];
  return {a.s_A + u * (b.s_A - a.s_A), a.s_B + u * (b.s_B - a.s_B)};
}

std::string ShimSchedule::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < times_.size(); ++i) {
    pts.push_back({times_[i], points_[i].s_A, points_[i].s_B});
  }
  return nlohmann::json{{"duration_ms", duration_ms()}, {"points", pts}}.dump();
}

ShimSchedule ShimSchedule::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("$: malformed JSON (") + e.what() + ")");
  }
  if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array()) {
    throw Error(ErrorKind::Config, "$.points: expected an array of [t_ms, sA, sB]");
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "duration_ms" && key != "points") {
      throw Error(ErrorKind::Config, "$." + key + ": unknown key");
    }
  }
  std::vector<double> t;
  std::vector<ShimPoint> p;
  std::size_t i = 0;
  for (const auto& row : doc["points"]) {
    if (!row.is_array() || row.size() != 3 || !row[0].is_number() || !row[1].is_number() ||
        !row[2].is_number()) {
      throw Error(ErrorKind::Config,
                  "$.points[" + std::to_string(i) + "]: expected [t_ms, sA, sB]");
    }
    t.push_back(row[0].get<double>());
    p.push_back({row[1].get<double>(), row[2].get<double>()});
    ++i;
  }
  ShimSchedule s(std::move(t), std::move(p));
  if (doc.contains("duration_ms")) {
    if (!doc["duration_ms"].is_number() ||
        std::abs(doc["duration_ms"].get<double>() - s.duration_ms()) > 1e-12 * s.duration_ms()) {
      throw Error(ErrorKind::Config, "$.duration_ms: must equal the last sample time");
    }
  }
  return s;
}

double default_time_step(const CurvatureModel& model, const ShimSchedule& schedule,
                         double max_phase) {
  double rho = 0.0;
  for (const ShimPoint& p : schedule.points()) {
    const ModeSystem ms = eigensystem(model, p);
    rho = std::max({rho, std::abs(ms.delta_k[0]), std::abs(ms.delta_k[2])});
  }
  const double omega = kTwoPi * model.delta_f_kHz() * std::max(rho, 1e-12);
  return std::min({1e-3, schedule.duration_ms() / 4000.0, max_phase / omega});
}

PropagationResult propagate(const SinglePhononState& state, const CurvatureModel& model,
                            const ShimSchedule& schedule, std::optional<double> dt_ms) {
  state.require_normalized();
  const double T = schedule.duration_ms();
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "schedule duration must be positive");
  const double dt_req = dt_ms.value_or(default_time_step(model, schedule));
  if (!(dt_req > 0.0) || !std::isfinite(dt_req)) {
    throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt_req - 1e-9));
  const double h = T / static_cast<double>(steps);
  const double df = model.delta_f_kHz();
  const cd i2pi(0.0, kTwoPi * df);

  // Generator in units of i 2 pi delta_f; W = ones + diag(S).
  auto apply = [&](const ShimPoint& s, const Amplitudes& v) -> Amplitudes {
    const Eigen::Vector3d d = shim_diagonal(model.alpha, s);
    const cd sum = v.sum();
    Amplitudes out;
    for (Eigen::Index k = 0; k < 3; ++k) out[k] = i2pi * (sum + d[k] * v[k]);
    return out;
  };

  SinglePhononState site = to_site_basis(state);
  Amplitudes psi = site.amplitudes;
  double drift = 0.0;
  std::array<double, 3> phases{};
  std::array<double, 3> prev = eigensystem(model, schedule.at(0.0)).delta_k;

  for (std::size_t n = 0; n < steps; ++n) {
    const double t = h * static_cast<double>(n);
    const ShimPoint s0 = schedule.at(t);
    const ShimPoint sm = schedule.at(t + 0.5 * h);
    const ShimPoint s1 = schedule.at(t + h);
    const Amplitudes k1 = apply(s0, psi);
    const Amplitudes k2 = apply(sm, psi + 0.5 * h * k1);
    const Amplitudes k3 = apply(sm, psi + 0.5 * h * k2);
    const Amplitudes k4 = apply(s1, psi + h * k3);
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    drift = std::max(drift, std::abs(psi.squaredNorm() - 1.0));

    const std::array<double, 3> next = eigensystem(model, s1).delta_k;
    for (std::size_t j = 0; j < 3; ++j) phases[j] += kTwoPi * df * 0.5 * (prev[j] + next[j]) * h;
    prev = next;
  }
  if (drift > kMaxNormDrift) {
    throw Error(ErrorKind::StepSize, "norm drift " + std::to_string(drift) +
                                         " exceeds tolerance; reduce dt below " +
                                         std::to_string(h) + " ms");
  }
  PropagationResult r;
  r.final_state.amplitudes = psi;
  r.final_state.basis = Basis::SiteABC;
  if (state.basis == Basis::Eigen123 && state.modes) {
    r.final_state = change_basis(r.final_state, *state.modes);
  }
  r.norm_drift = drift;
  r.band_phases = phases;
  r.steps = steps;
  r.dt_ms = h;
  return r;
}

}  // namespace ionmodes
