#include "ionmodes/fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Dense>

#include "ionmodes/constants.hpp"
#include "ionmodes/error.hpp"

namespace ionmodes {

void FitResult::set(std::string name, double value, double uncertainty) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      values[i] = value;
      uncertainties[i] = uncertainty;
      return;
    }
  }
  names.push_back(std::move(name));
  values.push_back(value);
  uncertainties.push_back(uncertainty);
}

bool FitResult::has(std::string_view name) const noexcept {
  return std::find(names.begin(), names.end(), name) != names.end();
}

double FitResult::value(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw Error(ErrorKind::InvalidArgument, "fit has no parameter '" + std::string(name) + "'");
  }
  return values[static_cast<std::size_t>(it - names.begin())];
}

double FitResult::uncertainty(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw Error(ErrorKind::InvalidArgument, "fit has no parameter '" + std::string(name) + "'");
  }
  return uncertainties[static_cast<std::size_t>(it - names.begin())];
}

LmOutcome levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd p, std::size_t m,
                              const LmOptions& options) {
  const auto np = p.size();
  Eigen::VectorXd r(static_cast<Eigen::Index>(m));
  Eigen::MatrixXd J(static_cast<Eigen::Index>(m), np);
  fn(p, r, J);
  double rss = r.squaredNorm();
  double lambda = 1e-3;

  LmOutcome out;
  std::size_t it = 0;
  bool converged = !std::isfinite(rss) ? false : rss == 0.0;
  Eigen::VectorXd r_try(r.size());
  Eigen::MatrixXd J_try(J.rows(), J.cols());
  while (!converged && it < options.max_iterations) {
    ++it;
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool accepted = false;
    while (!accepted && lambda < 1e20) {
      Eigen::MatrixXd Ad = A;
      for (Eigen::Index k = 0; k < np; ++k) Ad(k, k) += lambda * std::max(A(k, k), 1e-30);
      const Eigen::VectorXd step = Ad.ldlt().solve(-g);
      const double tol = options.relative_tolerance * (p.norm() + options.relative_tolerance);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd p_try = p + step;
      fn(p_try, r_try, J_try);
      const double rss_try = r_try.squaredNorm();
      if (std::isfinite(rss_try) && rss_try <= rss) {
        accepted = true;
        p = p_try;
        r = r_try;
        J = J_try;
        const double drop = rss - rss_try;
        rss = rss_try;
        lambda = std::max(lambda / 10.0, 1e-12);
        if (step.norm() <= tol || rss == 0.0 || drop <= 1e-30 * std::max(rss, 1e-300)) {
          converged = true;
        }
      } else {
        if (step.norm() <= tol) {
          converged = true;
          break;
        }
        lambda *= 10.0;
      }
    }
    if (!accepted && !converged) break;
  }

  out.parameters = p;
  out.rss = rss;
  out.converged = converged;
  out.iterations = it;
  const double dof = static_cast<double>(m) - static_cast<double>(np);
  const double sigma2 = dof > 0.0 ? rss / dof : 0.0;
  const Eigen::MatrixXd A = J.transpose() * J;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  out.covariance = sigma2 * cod.pseudoInverse();
  out.standard_errors = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

FitResult fit_gaussian_peak(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 5) {
    throw Error(ErrorKind::InvalidArgument, "Gaussian fit needs at least 5 (x, y) points");
  }
  const std::size_t m = x.size();
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  const auto imax = static_cast<std::size_t>(ymax_it - y.begin());
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double xmin = *xmin_it;
  const double xmax = *xmax_it;
  const double half = 0.5 * (*ymin_it + *ymax_it);
  double above_lo = x[imax];
  double above_hi = x[imax];
  for (std::size_t i = 0; i < m; ++i) {
    if (y[i] >= half) {
      above_lo = std::min(above_lo, x[i]);
      above_hi = std::max(above_hi, x[i]);
    }
  }
  double w0 = (above_hi - above_lo) / 2.3548;
  if (!(w0 > 0.0)) w0 = (xmax - xmin) / 6.0;

  Eigen::VectorXd p0(4);
  p0 << x[imax], w0, *ymax_it - *ymin_it, *ymin_it;
  const ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    for (std::size_t i = 0; i < m; ++i) {
      const double d = x[i] - p[0];
      const double w2 = p[1] * p[1];
      const double e = std::exp(-d * d / (2.0 * w2));
      const auto k = static_cast<Eigen::Index>(i);
      r[k] = p[3] + p[2] * e - y[i];
      J(k, 0) = p[2] * e * d / w2;
      J(k, 1) = p[2] * e * d * d / (w2 * p[1]);
      J(k, 2) = e;
      J(k, 3) = 1.0;
    }
  };
  const LmOutcome o = levenberg_marquardt(fn, p0, m);
  FitResult f;
  f.set("center", o.parameters[0], o.standard_errors[0]);
  f.set("width", std::abs(o.parameters[1]), o.standard_errors[1]);
  f.set("amplitude", o.parameters[2], o.standard_errors[2]);
  f.set("offset", o.parameters[3], o.standard_errors[3]);
  f.residual_norm = std::sqrt(o.rss);
  f.iterations = o.iterations;
  f.converged = o.converged && o.parameters.allFinite();
  if (o.parameters[0] < xmin || o.parameters[0] > xmax) {
    f.converged = false;
    f.notes.emplace_back("center outside the data span");
  }
  return f;
}

namespace {

struct Periodogram {
  std::vector<double> freq;
  std::vector<double> power;
};

Periodogram periodogram(std::span<const double> t, std::span<const double> y, double mean) {
  std::vector<double> dts;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] > t[i - 1]) dts.push_back(t[i] - t[i - 1]);
  }
  std::nth_element(dts.begin(), dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2), dts.end());
  const double dt = dts[dts.size() / 2];
  const double span = t.back() - t.front();
  const double df = 1.0 / (8.0 * span);
  const double fmax = 0.5 / dt;
  Periodogram pg;
  for (double f = df; f <= fmax; f += df) {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      s += (y[i] - mean) * std::polar(1.0, -kTwoPi * f * t[i]);
    }
    pg.freq.push_back(f);
    pg.power.push_back(std::norm(s));
  }
  return pg;
}

// Linear least squares for offset and (cos, sin) coefficients at fixed frequencies.
Eigen::VectorXd linear_start(std::span<const double> t, std::span<const double> y,
                             const std::vector<double>& freqs) {
  const auto m = static_cast<Eigen::Index>(t.size());
  const auto K = static_cast<Eigen::Index>(freqs.size());
  Eigen::MatrixXd A(m, 1 + 2 * K);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    A(i, 0) = 1.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      const double ph = kTwoPi * freqs[static_cast<std::size_t>(k)] * t[ui];
      A(i, 1 + 2 * k) = std::cos(ph);
      A(i, 2 + 2 * k) = std::sin(ph);
    }
    b[i] = y[ui];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  Eigen::VectorXd p(1 + 3 * K);
  p[0] = c[0];
  for (Eigen::Index k = 0; k < K; ++k) {
    p[1 + 3 * k] = freqs[static_cast<std::size_t>(k)];
    p[2 + 3 * k] = c[1 + 2 * k];
    p[3 + 3 * k] = c[2 + 2 * k];
  }
  return p;
}

void for_each_combination(std::size_t n, std::size_t k,
                          const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

double wrap_phase(double phi) noexcept {
  double w = std::remainder(phi, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double phase_difference(const FitResult& a, const FitResult& b) {
  auto phase = [](const FitResult& f) { return f.has("phase") ? f.value("phase") : f.value("phase_1"); };
  return wrap_phase(phase(a) - phase(b));
}

FitResult fit_sinusoid_sum(const FringeTrace& trace, std::size_t K) {
  trace.validate();
  if (K < 1 || K > 3) throw Error(ErrorKind::InvalidArgument, "tone count K must be 1..3");
  const std::span<const double> t(trace.delays_ms);
  const std::span<const double> y(trace.p_bright);
  const std::size_t m = t.size();
  if (m < 3 * K + 2) throw Error(ErrorKind::InvalidArgument, "trace too short for the tone count");
  for (std::size_t i = 1; i < m; ++i) {
    if (t[i] < t[i - 1]) throw Error(ErrorKind::InvalidArgument, "delays must be sorted");
  }
  if (!(t.back() > t.front())) throw Error(ErrorKind::InvalidArgument, "delays span no time");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m);

  FitResult f;
  if (var <= 1e-24 * std::max(1.0, mean * mean)) {
    f.set("offset", mean);
    for (std::size_t k = 1; k <= K; ++k) {
      f.set("amplitude_" + std::to_string(k), 0.0);
      f.set("frequency_" + std::to_string(k), 0.0);
      f.set("phase_" + std::to_string(k), 0.0);
    }
    f.converged = true;
    f.reliable = false;
    f.residual_norm = std::sqrt(var * static_cast<double>(m));
    f.notes.emplace_back("constant trace");
    return f;
  }

  const Periodogram pg = periodogram(t, y, mean);
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < pg.power.size(); ++i) {
    const bool left = i == 0 || pg.power[i] >= pg.power[i - 1];
    const bool right = i + 1 == pg.power.size() || pg.power[i] > pg.power[i + 1];
    if (left && right) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(),
            [&](std::size_t a, std::size_t b) { return pg.power[a] > pg.power[b]; });
  if (peaks.size() > K + 2) peaks.resize(K + 2);
  // Pad with the strongest remaining grid points well away from chosen peaks.
  std::vector<std::size_t> order(pg.power.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pg.power[a] > pg.power[b]; });
  for (std::size_t i : order) {
    if (peaks.size() >= K) break;
    bool far = true;
    for (std::size_t p : peaks) far = far && (i > p ? i - p : p - i) > 4;
    if (far) peaks.push_back(i);
  }
  if (peaks.size() < K) throw Error(ErrorKind::InvalidArgument, "trace too short to resolve tones");

  const ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    const auto Kp = (p.size() - 1) / 3;
    for (std::size_t i = 0; i < m; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      double v = p[0];
      J(ii, 0) = 1.0;
      for (Eigen::Index k = 0; k < Kp; ++k) {
        const double fr = p[1 + 3 * k];
        const double b = p[2 + 3 * k];
        const double d = p[3 + 3 * k];
        const double ph = kTwoPi * fr * t[i];
        const double c = std::cos(ph);
        const double s = std::sin(ph);
        v += b * c + d * s;
        J(ii, 1 + 3 * k) = kTwoPi * t[i] * (-b * s + d * c);
        J(ii, 2 + 3 * k) = c;
        J(ii, 3 + 3 * k) = s;
      }
      r[ii] = v - y[i];
    }
  };

  LmOutcome best;
  bool have = false;
  for_each_combination(peaks.size(), K, [&](const std::vector<std::size_t>& combo) {
    std::vector<double> freqs;
    for (std::size_t c : combo) freqs.push_back(pg.freq[peaks[c]]);
    const LmOutcome o = levenberg_marquardt(fn, linear_start(t, y, freqs), m);
    if (!o.parameters.allFinite()) return;
    const bool better = !have || (o.converged && !best.converged) ||
                        (o.converged == best.converged && o.rss < best.rss);
    if (better) {
      best = o;
      have = true;
    }
  });
  if (!have) {
    f.converged = false;
    f.notes.emplace_back("no start converged");
    return f;
  }

  struct Tone {
    double freq, amp, phase, s_freq, s_amp, s_phase;
  };
  std::vector<Tone> tones;
  const auto& p = best.parameters;
  const auto& C = best.covariance;
  for (std::size_t k = 0; k < K; ++k) {
    const auto i = static_cast<Eigen::Index>(1 + 3 * k);
    double fr = p[i];
    double b = p[i + 1];
    double d = p[i + 2];
    const double vb = C(i + 1, i + 1);
    const double vd = C(i + 2, i + 2);
    const double cbd = C(i + 1, i + 2);
    if (fr < 0.0) {  // cos(-x) = cos(x): fold negative frequencies
      fr = -fr;
      d = -d;
    }
    const double A = std::hypot(b, d);
    const double sA = A > 0.0 ? std::sqrt(std::max(0.0, b * b * vb + d * d * vd + 2 * b * d * cbd)) / A : 0.0;
    const double sphi =
        A > 0.0 ? std::sqrt(std::max(0.0, d * d * vb + b * b * vd - 2 * b * d * cbd)) / (A * A) : kPi;
    tones.push_back({fr, A, wrap_phase(std::atan2(-d, b)), std::sqrt(std::max(0.0, C(i, i))), sA, sphi});
  }
  std::sort(tones.begin(), tones.end(), [](const Tone& a, const Tone& b) { return a.freq < b.freq; });
  f.set("offset", p[0], best.standard_errors[0]);
  bool reliable = true;
  for (std::size_t k = 0; k < K; ++k) {
    const std::string n = std::to_string(k + 1);
    f.set("amplitude_" + n, tones[k].amp, tones[k].s_amp);
    f.set("frequency_" + n, tones[k].freq, tones[k].s_freq);
    f.set("phase_" + n, tones[k].phase, tones[k].s_phase);
    if (tones[k].amp <= 2.0 * tones[k].s_amp || tones[k].amp < 1e-9) reliable = false;
  }
  f.residual_norm = std::sqrt(best.rss);
  f.converged = best.converged;
  f.iterations = best.iterations;
  f.reliable = reliable;
  if (!reliable) f.notes.emplace_back("amplitude consistent with zero; phase unreliable");
  return f;
}

FitResult fit_single_sinusoid(const FringeTrace& trace) {
  FitResult f = fit_sinusoid_sum(trace, 1);
  if (f.has("amplitude_1")) {
    FitResult g;
    g.set("frequency", f.value("frequency_1"), f.uncertainty("frequency_1"));
    g.set("phase", f.value("phase_1"), f.uncertainty("phase_1"));
    g.set("amplitude", f.value("amplitude_1"), f.uncertainty("amplitude_1"));
    g.set("offset", f.value("offset"), f.uncertainty("offset"));
    g.residual_norm = f.residual_norm;
    g.converged = f.converged;
    g.reliable = f.reliable;
    g.iterations = f.iterations;
    g.notes = f.notes;
    return g;
  }
  return f;
}

}  // namespace ionmodes
