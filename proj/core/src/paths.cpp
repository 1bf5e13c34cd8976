#include "ionmodes/paths.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ionmodes/error.hpp"

namespace ionmodes {
namespace {

constexpr double kRayMin = 1e-3;
constexpr double kRayMax = 5.0;
constexpr std::size_t kRayScanSteps = 250;
constexpr double kLevelTolerance = 1e-6;

double band_value(double alpha, Band band, ShimPoint p) {
  return eigensystem(alpha, p).value(band);
}

// Smallest radius on the ray where the band crosses `level`.
double first_crossing(double alpha, Band band, double level, double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  auto f = [&](double r) { return band_value(alpha, band, {r * c, r * s}) - level; };

  const double step = (kRayMax - kRayMin) / static_cast<double>(kRayScanSteps);
  double lo = kRayMin;
  double flo = f(lo);
  for (std::size_t k = 1; k <= kRayScanSteps; ++k) {
    const double hi = kRayMin + step * static_cast<double>(k);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (flo * fhi <= 0.0) {
      double a = lo;
      double b = hi;
      double fa = flo;
      for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fa * fm <= 0.0) {
          b = m;
        } else {
          a = m;
          fa = fm;
        }
      }
      const double r = 0.5 * (a + b);
      if (std::abs(f(r)) > kLevelTolerance) {
        throw Error(ErrorKind::ContourGeometry,
                    "bisection did not converge onto the level at angle " + std::to_string(phi));
      }
      return r;
    }
    lo = hi;
    flo = fhi;
  }
  throw Error(ErrorKind::NoContour,
              "level " + std::to_string(level) + " not crossed on ray at angle " +
                  std::to_string(phi));
}

double raised_cosine_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 0.5 * (1.0 - std::cos(kPi * x));
}

std::vector<ShimPoint> apply_family(const std::vector<ShimPoint>& half, PathFamily family,
                                    const FamilyOptions& o) {
  const std::size_t n = half.size();
  std::vector<ShimPoint> out(half);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    double g = 1.0;
    switch (family) {
      case PathFamily::Larger:
        g = 1.0 + (o.larger_scale - 1.0) * raised_cosine_step(u / o.taper_fraction);
        break;
      case PathFamily::Smaller:
        g = 1.0 + (o.smaller_scale - 1.0) * raised_cosine_step(u / o.taper_fraction);
        break;
      case PathFamily::Wavy:
        g = 1.0 + o.wave_amplitude * std::sin(kPi * o.wave_periods * u);
        break;
      default:
        break;
    }
    out[i] = {g * half[i].s_A, g * half[i].s_B};
  }
  out.front() = half.front();
  return out;
}

std::vector<ShimPoint> mirror_reverse(const std::vector<ShimPoint>& leg) {
  std::vector<ShimPoint> out;
  out.reserve(leg.size());
  for (auto it = leg.rbegin(); it != leg.rend(); ++it) out.push_back(it->swapped());
  return out;
}

std::vector<ShimPoint> reverse(const std::vector<ShimPoint>& leg) {
  return {leg.rbegin(), leg.rend()};
}

// Relative dwell weight of each segment: sum over band pairs of |<j|dS|l>| / gap^2.
std::vector<double> adiabatic_weights(double alpha, const std::vector<ShimPoint>& pts,
                                      std::size_t first, std::size_t last) {
  std::vector<double> w;
  for (std::size_t k = first; k < last; ++k) {
    const ShimPoint mid{0.5 * (pts[k].s_A + pts[k + 1].s_A), 0.5 * (pts[k].s_B + pts[k + 1].s_B)};
    const ModeSystem ms = eigensystem(alpha, mid);
    const Eigen::Vector3d dS = shim_diagonal(alpha, pts[k + 1]) - shim_diagonal(alpha, pts[k]);
    double sum = 0.0;
    for (int j = 0; j < 3; ++j) {
      for (int l = j + 1; l < 3; ++l) {
        const double m = std::abs(ms.eigenvectors.col(j).dot(dS.cwiseProduct(ms.eigenvectors.col(l))));
        const double gap = ms.delta_k[l] - ms.delta_k[j];
        sum += m / std::max(gap * gap, 1e-12);
      }
    }
    w.push_back(sum);
  }
  const double wmax = *std::max_element(w.begin(), w.end());
  for (double& x : w) x = std::max(x, 1e-6 * wmax + 1e-300);
  return w;
}

std::vector<double> assign_times(double alpha, const std::vector<ShimPoint>& pts,
                                 const std::vector<std::size_t>& leg_ends, double T,
                                 const FamilyOptions& o) {
  std::vector<double> times(pts.size(), 0.0);
  std::vector<std::vector<double>> seg(leg_ends.size());
  std::vector<double> leg_total(leg_ends.size(), 0.0);
  std::size_t first = 0;
  for (std::size_t l = 0; l < leg_ends.size(); ++l) {
    const std::size_t last = leg_ends[l];
    if (o.profile == SpeedProfile::LocalAdiabatic) {
      seg[l] = adiabatic_weights(alpha, pts, first, last);
    } else {
      for (std::size_t k = first; k < last; ++k) {
        seg[l].push_back(std::hypot(pts[k + 1].s_A - pts[k].s_A, pts[k + 1].s_B - pts[k].s_B));
      }
    }
    leg_total[l] = std::accumulate(seg[l].begin(), seg[l].end(), 0.0);
    first = last;
  }
  const double total = std::accumulate(leg_total.begin(), leg_total.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorKind::DegeneratePath, "path has zero length");

  double t0 = 0.0;
  first = 0;
  for (std::size_t l = 0; l < leg_ends.size(); ++l) {
    const double T_leg = T * leg_total[l] / total;
    double acc = 0.0;
    for (std::size_t k = first; k < leg_ends[l]; ++k) {
      acc += seg[l][k - first];
      const double u = std::min(acc / leg_total[l], 1.0);
      const double tau = o.profile == SpeedProfile::UniformArcLength
                             ? ramped_progress_inverse(u, o.ramp_fraction)
                             : u;
      times[k + 1] = t0 + tau * T_leg;
    }
    t0 += T_leg;
    times[leg_ends[l]] = l + 1 == leg_ends.size() ? T : t0;
    first = leg_ends[l];
  }
  return times;
}

void append_leg(std::vector<ShimPoint>& pts, std::vector<std::size_t>& ends,
                const std::vector<ShimPoint>& leg) {
  if (pts.empty()) {
    pts.insert(pts.end(), leg.begin(), leg.end());
  } else {
    pts.insert(pts.end(), leg.begin() + 1, leg.end());
  }
  ends.push_back(pts.size() - 1);
}

ShimPath make_path(double alpha, std::vector<ShimPoint> pts, std::vector<std::size_t> ends,
                   double T, PathFamily family, const FamilyOptions& o) {
  for (const ShimPoint& p : pts) {
    if (p.radius() < kOriginExclusion) {
      throw Error(ErrorKind::DegeneratePath, "path passes within 1e-3 of the conical intersection");
    }
  }
  ShimPath path;
  path.times_ms = assign_times(alpha, pts, ends, T, o);
  path.waypoints = std::move(pts);
  path.leg_ends = std::move(ends);
  path.duration_ms = T;
  path.family = family;
  path.winding = winding_number(path.waypoints);
  return path;
}

}  // namespace

SpecialPoints special_points(double alpha) {
  if (!std::isfinite(alpha) || std::abs(alpha - 1.0) < 1e-12 || std::abs(alpha + 1.0) < 1e-12) {
    throw Error(ErrorKind::SingularParameter, "special points undefined for alpha = +-1");
  }
  const double r2 = std::sqrt(2.0);
  const double s0 = 1.0 / (alpha - 1.0);
  const double s1 = (r2 - 1.0 - (r2 - 3.0) * alpha) / (alpha * alpha - 1.0);
  return {{s0, s0}, {s1, s1}};
}

std::vector<ShimPoint> constant_curvature_contour(const CurvatureModel& model, Band band,
                                                  double level, ShimPoint from, ShimPoint to,
                                                  std::size_t n, Orientation orientation) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "contour needs at least two points");
  if (band == Band::Lower) {
    throw Error(ErrorKind::InvalidArgument, "contours are defined for bands 2 and 3");
  }
  for (const ShimPoint& p : {from, to}) {
    if (std::abs(band_value(model.alpha, band, p) - level) > kLevelTolerance) {
      throw Error(ErrorKind::InvalidArgument, "contour endpoint does not lie on the level set");
    }
  }
  const double a0 = std::atan2(from.s_B, from.s_A);
  const double a1 = std::atan2(to.s_B, to.s_A);
  double span = std::fmod(a1 - a0 + 4.0 * kPi, 2.0 * kPi);
  if (orientation == Orientation::Clockwise) span -= 2.0 * kPi;

  std::vector<ShimPoint> out;
  out.reserve(n);
  out.push_back(from);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double phi = a0 + span * static_cast<double>(i) / static_cast<double>(n - 1);
    const double r = first_crossing(model.alpha, band, level, phi);
    out.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  out.push_back(to);
  return out;
}

std::string_view to_string(PathFamily f) noexcept {
  switch (f) {
    case PathFamily::Canonical: return "canonical";
    case PathFamily::Larger: return "larger";
    case PathFamily::Smaller: return "smaller";
    case PathFamily::Wavy: return "wavy";
    case PathFamily::MultiLoop: return "multiloop";
    case PathFamily::Custom: return "custom";
  }
  return "custom";
}

PathFamily parse_path_family(std::string_view name) {
  for (PathFamily f : {PathFamily::Canonical, PathFamily::Larger, PathFamily::Smaller,
                       PathFamily::Wavy, PathFamily::MultiLoop, PathFamily::Custom}) {
    if (name == to_string(f)) return f;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown path family '" + std::string(name) + "'");
}

std::string_view to_string(SpeedProfile p) noexcept {
  return p == SpeedProfile::UniformArcLength ? "uniform" : "local-adiabatic";
}

SpeedProfile parse_speed_profile(std::string_view name) {
  if (name == "uniform") return SpeedProfile::UniformArcLength;
  if (name == "local-adiabatic") return SpeedProfile::LocalAdiabatic;
  throw Error(ErrorKind::InvalidArgument, "unknown speed profile '" + std::string(name) + "'");
}

ShimSchedule ShimPath::to_schedule() const { return ShimSchedule(times_ms, waypoints); }

ShimPath ShimPath::retimed(double new_duration_ms) const {
  if (!(new_duration_ms > 0.0) || !(duration_ms > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "durations must be positive");
  }
  ShimPath p = *this;
  const double k = new_duration_ms / duration_ms;
  for (double& t : p.times_ms) t *= k;
  p.times_ms.back() = new_duration_ms;
  p.duration_ms = new_duration_ms;
  return p;
}

ShimPath ShimPath::mirrored() const {
  ShimPath p = *this;
  for (ShimPoint& w : p.waypoints) w = w.swapped();
  p.winding = -winding;
  return p;
}

ShimPath ShimPath::from_schedule(const ShimSchedule& schedule) {
  if (!schedule.closed()) throw Error(ErrorKind::InvalidPath, "path must be closed");
  ShimPath p;
  p.waypoints = schedule.points();
  p.times_ms = schedule.times();
  p.leg_ends = {p.waypoints.size() - 1};
  p.duration_ms = schedule.duration_ms();
  p.family = PathFamily::Custom;
  p.winding = winding_number(p.waypoints);
  return p;
}

double ramped_progress(double tau, double ramp) {
  tau = std::clamp(tau, 0.0, 1.0);
  if (ramp <= 0.0) return tau;
  if (ramp > 0.5) throw Error(ErrorKind::InvalidArgument, "ramp fraction must be <= 0.5");
  auto U = [ramp](double x) {
    if (x < ramp) return 0.5 * x - ramp / (2.0 * kPi) * std::sin(kPi * x / ramp);
    return 0.5 * ramp + (x - ramp);
  };
  const double total = 1.0 - ramp;
  const double v = tau <= 1.0 - ramp ? U(tau) : total - U(1.0 - tau);
  return v / total;
}

double ramped_progress_inverse(double u, double ramp) {
  u = std::clamp(u, 0.0, 1.0);
  if (ramp <= 0.0) return u;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (lo + hi);
    (ramped_progress(m, ramp) < u ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

PathPair build_path_pair(const CurvatureModel& model, PathFamily family, double T_ms,
                         std::size_t n, const FamilyOptions& options) {
  if (!(T_ms > 0.0) || !std::isfinite(T_ms)) {
    throw Error(ErrorKind::InvalidArgument, "traversal time must be positive");
  }
  if (n < 16) throw Error(ErrorKind::InvalidArgument, "need at least 16 waypoints per leg");
  if (family == PathFamily::Custom) {
    throw Error(ErrorKind::InvalidArgument, "custom paths are imported, not built");
  }
  if (family == PathFamily::MultiLoop && options.loops < 1) {
    throw Error(ErrorKind::InvalidArgument, "loop count must be positive");
  }
  const SpecialPoints sp = special_points(model.alpha);
  const double level = band_value(model.alpha, Band::Middle, sp.start);
  const std::vector<ShimPoint> half = apply_family(
      constant_curvature_contour(model, Band::Middle, level, sp.start, sp.turn, n), family, options);
  const std::vector<ShimPoint> back_mirror = mirror_reverse(half);
  const std::vector<ShimPoint> back_same = reverse(half);

  const int loops = family == PathFamily::MultiLoop ? options.loops : 1;
  std::vector<ShimPoint> enc;
  std::vector<ShimPoint> non;
  std::vector<std::size_t> enc_ends;
  std::vector<std::size_t> non_ends;
  for (int k = 0; k < loops; ++k) {
    append_leg(enc, enc_ends, half);
    append_leg(enc, enc_ends, back_mirror);
    append_leg(non, non_ends, half);
    append_leg(non, non_ends, back_same);
  }
  return {make_path(model.alpha, std::move(enc), std::move(enc_ends), T_ms, family, options),
          make_path(model.alpha, std::move(non), std::move(non_ends), T_ms, family, options)};
}

double dynamical_phase(const CurvatureModel& model, const ShimPath& path, Band band) {
  if (path.waypoints.size() < 2 || path.duration_ms == 0.0) return 0.0;
  if (path.times_ms.size() != path.waypoints.size()) {
    throw Error(ErrorKind::InvalidPath, "path timing does not match its waypoints");
  }
  const std::size_t b = index(band);
  std::vector<double> v(path.waypoints.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const ModeSystem ms = eigensystem(model, path.waypoints[i]);
    if ((b > 0 && ms.delta_k[b] - ms.delta_k[b - 1] < kDegeneracyTolerance) ||
        (b < 2 && ms.delta_k[b + 1] - ms.delta_k[b] < kDegeneracyTolerance)) {
      throw Error(ErrorKind::PhaseUndefined, "band is degenerate along the path");
    }
    v[i] = ms.delta_k[b];
  }
  double phase = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    phase += 0.5 * (v[i] + v[i + 1]) * (path.times_ms[i + 1] - path.times_ms[i]);
  }
  return kTwoPi * model.delta_f_kHz() * phase;
}

BerryPhase discrete_berry_phase(const CurvatureModel& model, const ShimPath& path, Band band) {
  const auto& w = path.waypoints;
  if (w.size() < 3 || !(w.front() == w.back())) {
    throw Error(ErrorKind::InvalidPath, "Berry phase needs a closed path");
  }
  const std::size_t b = index(band);
  std::vector<Eigen::Vector3d> vecs;
  vecs.reserve(w.size());
  for (const ShimPoint& p : w) {
    const ModeSystem ms = eigensystem(model, p);
    const double gap_lo = b > 0 ? ms.delta_k[b] - ms.delta_k[b - 1] : INFINITY;
    const double gap_hi = b < 2 ? ms.delta_k[b + 1] - ms.delta_k[b] : INFINITY;
    if (std::min(gap_lo, gap_hi) <= 1e-6) {
      throw Error(ErrorKind::PhaseUndefined, "band gap closes along the path");
    }
    vecs.push_back(ms.eigenvectors.col(static_cast<Eigen::Index>(b)));
  }
  int sign = 1;
  for (std::size_t i = 0; i + 1 < vecs.size(); ++i) {
    const double ov = vecs[i].dot(vecs[i + 1]);
    if (std::abs(ov) < kMinOverlap) {
      throw Error(ErrorKind::RefinePath, "eigenvector overlap " + std::to_string(ov) +
                                             " below threshold; add waypoints");
    }
    if (ov < 0.0) sign = -sign;
  }
  // Closing overlap: the last waypoint repeats the first.
  const double close = vecs.back().dot(vecs.front());
  if (close < 0.0) sign = -sign;

  BerryPhase r;
  r.raw = sign < 0 ? kPi : 0.0;
  r.snapped = r.raw;
  r.was_snapped = true;
  return r;
}

int winding_number(const std::vector<ShimPoint>& pts) {
  if (pts.size() < 3 || !(pts.front() == pts.back())) {
    throw Error(ErrorKind::InvalidPath, "winding number needs a closed path");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const ShimPoint& a = pts[i];
    const ShimPoint& c = pts[i + 1];
    if (a.radius() < kOriginExclusion) {
      throw Error(ErrorKind::InvalidPath, "path touches the origin");
    }
    total += std::atan2(a.s_A * c.s_B - a.s_B * c.s_A, a.s_A * c.s_A + a.s_B * c.s_B);
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

int winding_number(const ShimPath& path) { return winding_number(path.waypoints); }

}  // namespace ionmodes
