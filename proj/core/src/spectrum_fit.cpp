#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ionmodes/error.hpp"
#include "ionmodes/fit.hpp"

namespace ionmodes {
namespace {

struct Line {
  double intercept = 0.0;
  double slope = 0.0;
  double s_intercept = 0.0;
  double s_slope = 0.0;
  double rss = 0.0;
};

Line fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  Line l;
  l.slope = sxy / sxx;
  l.intercept = my - l.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - l.intercept - l.slope * x[i];
    l.rss += r * r;
  }
  const double s2 = n > 2.0 ? l.rss / (n - 2.0) : 0.0;
  l.s_slope = std::sqrt(s2 / sxx);
  l.s_intercept = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  return l;
}

}  // namespace

std::vector<PeakRow> extract_peak_centers(const SpectrumMap& map,
                                          const PeakExtractionOptions& options) {
  map.validate();
  const std::size_t nf = map.df_kHz.size();
  const std::size_t w = options.window_points;
  if (w < 5 || w > nf) throw Error(ErrorKind::InvalidArgument, "invalid peak window size");
  const double step = (map.df_kHz.back() - map.df_kHz.front()) / static_cast<double>(nf - 1);
  const double min_sep = options.min_separation_kHz.value_or(
      0.5 * step * static_cast<double>(w - 1) + 2.0 * options.linewidth_kHz);

  std::vector<PeakRow> rows;
  for (std::size_t i = 0; i < map.dV_mV.size(); ++i) {
    std::vector<double> col(nf);
    for (std::size_t j = 0; j < nf; ++j) col[j] = map.at(i, j);
    const double cmax = *std::max_element(col.begin(), col.end());

    std::vector<std::size_t> maxima;
    for (std::size_t j = 1; j + 1 < nf; ++j) {
      if (col[j] >= col[j - 1] && col[j] >= col[j + 1]) maxima.push_back(j);
    }
    std::sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) { return col[a] > col[b]; });
    std::vector<std::size_t> picked;
    for (std::size_t j : maxima) {
      bool separated = true;
      for (std::size_t k : picked) {
        separated = separated && std::abs(map.df_kHz[j] - map.df_kHz[k]) >= min_sep;
      }
      if (separated) picked.push_back(j);
      if (picked.size() == 3) break;
    }
    if (picked.size() < 3) continue;
    bool tall = true;
    for (std::size_t j : picked) tall = tall && col[j] >= options.relative_height * cmax;
    if (!tall) continue;

    std::sort(picked.begin(), picked.end());
    PeakRow row;
    row.dV_mV = map.dV_mV[i];
    bool ok = true;
    for (std::size_t k = 0; k < 3 && ok; ++k) {
      const std::size_t half = (w - 1) / 2;
      const std::size_t lo = std::min(picked[k] > half ? picked[k] - half : 0, nf - w);
      const FitResult g = fit_gaussian_peak(std::span(map.df_kHz).subspan(lo, w),
                                            std::span(col).subspan(lo, w));
      ok = g.converged;
      if (ok) row.centers_kHz[k] = map.reference_kHz + g.value("center");
    }
    if (!ok) continue;
    std::sort(row.centers_kHz.begin(), row.centers_kHz.end());
    rows.push_back(row);
  }
  return rows;
}

FitResult extract_model_params(std::span<const PeakRow> rows) {
  std::set<double> distinct;
  for (const PeakRow& r : rows) {
    if (!std::isfinite(r.dV_mV)) throw Error(ErrorKind::InvalidArgument, "non-finite dV_A");
    distinct.insert(r.dV_mV);
  }
  if (distinct.size() < 4) {
    throw Error(ErrorKind::InvalidArgument, "need peak centres at >= 4 distinct voltages");
  }

  // The linear branch keeps one index on each side of the crossing at dV = 0;
  // try every assignment and keep the one that is best fit by a line.
  bool has_neg = false;
  bool has_pos = false;
  for (const PeakRow& r : rows) {
    has_neg = has_neg || r.dV_mV < 0.0;
    has_pos = has_pos || r.dV_mV > 0.0;
  }
  struct Hypothesis {
    std::size_t neg, pos;
    double rss;
  };
  std::vector<Hypothesis> hyps;
  for (std::size_t in = 0; in < (has_neg ? 3u : 1u); ++in) {
    for (std::size_t ip = 0; ip < (has_pos ? 3u : 1u); ++ip) {
      std::vector<double> x;
      std::vector<double> y;
      for (const PeakRow& r : rows) {
        if (r.dV_mV == 0.0) continue;
        x.push_back(r.dV_mV);
        y.push_back(r.centers_kHz[r.dV_mV < 0.0 ? in : ip]);
      }
      if (x.size() < 3) continue;
      hyps.push_back({in, ip, fit_line(x, y).rss});
    }
  }
  if (hyps.size() < 2) {
    throw Error(ErrorKind::BranchAssignment, "too few off-crossing voltages to identify the linear branch");
  }
  std::sort(hyps.begin(), hyps.end(), [](const Hypothesis& a, const Hypothesis& b) { return a.rss < b.rss; });
  if (hyps[1].rss <= 4.0 * hyps[0].rss + 1e-18) {
    throw Error(ErrorKind::BranchAssignment, "linear branch not identifiable");
  }
  const Hypothesis& h = hyps.front();

  std::vector<double> x;
  std::vector<double> y1;
  std::vector<double> pair_sum;
  for (const PeakRow& r : rows) {
    std::size_t li = r.dV_mV < 0.0 ? h.neg : h.pos;
    if (r.dV_mV == 0.0) li = 0;
    double rest = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      if (k != li) rest += r.centers_kHz[k];
    }
    x.push_back(r.dV_mV);
    y1.push_back(r.centers_kHz[li]);
    pair_sum.push_back(rest);
  }
  const Line l1 = fit_line(x, y1);
  std::vector<double> y2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y2[i] = pair_sum[i] - 2.0 * l1.intercept - l1.slope * x[i];
  }
  const Line l2 = fit_line(x, y2);

  const double delta_f = l2.intercept / 3.0;
  const double c = l2.slope / delta_f;
  const double alpha = l1.slope / l2.slope;
  const double s_df = l2.s_intercept / 3.0;
  const double s_c = std::hypot(l2.s_slope / delta_f, l2.slope * s_df / (delta_f * delta_f));
  const double s_alpha = std::hypot(l1.s_slope / l2.slope, l1.slope * l2.s_slope / (l2.slope * l2.slope));

  FitResult f;
  f.set("f_R_kHz", l1.intercept, l1.s_intercept);
  f.set("delta_f_kHz", delta_f, s_df);
  f.set("c_per_mV", c, s_c);
  f.set("alpha", alpha, s_alpha);
  f.set("linear_slope_kHz_per_mV", l1.slope, l1.s_slope);
  f.set("delta_f_c_kHz_per_mV", l2.slope, l2.s_slope);
  f.residual_norm = std::sqrt(l1.rss + l2.rss);
  f.converged = std::isfinite(c) && std::isfinite(alpha);
  return f;
}

}  // namespace ionmodes
