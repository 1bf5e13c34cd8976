#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ionmodes/csv.hpp"
#include "ionmodes/error.hpp"
#include "ionmodes/experiment.hpp"
#include "ionmodes/fit.hpp"
#include "ionmodes/random.hpp"

namespace ionmodes::cli {
namespace {

using nlohmann::ordered_json;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<double> stepped(double a, double b, double step) {
  const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(a + static_cast<double>(i) * step);
  return out;
}

std::filesystem::path prepare(const RunConfig& c, const char* name) {
  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + c.out_dir.string() + ": " + ec.message());
  return c.out_dir / name;
}

std::string read_file(const std::string& path, const char* field) {
  if (path.empty()) throw Error(ErrorKind::Config, std::string(field) + ": input file is required");
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

FamilyOptions family_options(std::string_view profile, int loops) {
  FamilyOptions o;
  o.profile = parse_speed_profile(profile);
  o.loops = loops;
  return o;
}

ordered_json fit_json(const FitResult& fit, const BootstrapResult* b = nullptr) {
  return ordered_json::parse(fit_report_json(fit, b));
}

FitResult fringe_fit(const FringeTrace& trace, std::size_t tones) {
  return tones == 1 ? fit_single_sinusoid(trace) : fit_sinusoid_sum(trace, tones);
}

}  // namespace

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot rename onto " + path.string());
  }
}

CommandResult run_surfaces(const RunConfig& c) {
  const CurvatureModel model = c.model.curvature_model();
  const auto grid = square_grid(c.surfaces.grid, c.surfaces.range);
  const auto values = eigen_surfaces(model, grid);
  std::string csv = "sA,sB,dk1,dk2,dk3\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv += format_double(grid[i].s_A) + ',' + format_double(grid[i].s_B);
    for (double v : values[i]) csv += ',' + format_double(v);
    csv += '\n';
  }
  const auto path = prepare(c, "surfaces.csv");
  write_atomic(path, csv);
  const std::string n = std::to_string(c.surfaces.grid);
  return {"surfaces: " + n + "x" + n + " grid over +-" + format_double(c.surfaces.range) + " -> " +
              path.string(),
          {path}};
}

CommandResult run_spectrum(const RunConfig& c) {
  const auto& s = c.spectrum;
  const auto dV = stepped(s.dV_min_mV, s.dV_max_mV, s.dV_step_mV);
  const auto df = stepped(s.df_min_kHz, s.df_max_kHz, s.df_step_kHz);
  const SpectrumMap map =
      synthetic_spectrum(c.model.frequency_model(), dV, df, s.linewidth_kHz, s.noise, c.seed);
  const auto path = prepare(c, "spectrum.csv");
  write_atomic(path, to_csv(map));
  return {"spectrum: " + std::to_string(dV.size()) + " voltages x " + std::to_string(df.size()) +
              " detunings -> " + path.string(),
          {path}};
}

CommandResult run_exchange(const RunConfig& c) {
  const auto& e = c.exchange;
  const CurvatureModel model = c.model.curvature_model();
  const FrequencyModel fm = c.model.frequency_model();
  const auto delays = uniform_grid(0.0, e.duration_ms, e.points, false);
  FringeTrace trace =
      exchange_trace(model, ShimPoint::from_voltage(e.dV_mV, 0.0, fm.c_per_mV), delays, e.contrast);
  if (e.shots > 0) trace = sample_shots(trace, e.shots, c.seed);
  const FitResult fit = fit_sinusoid_sum(trace, e.tones);

  const auto f = mode_frequencies(fm, e.dV_mV);
  std::array<double, 3> expected{f[1] - f[0], f[2] - f[1], f[2] - f[0]};
  std::sort(expected.begin(), expected.end());

  ordered_json report = fit_json(fit);
  report["dV_mV"] = e.dV_mV;
  report["model_difference_frequencies_kHz"] = expected;

  const auto csv_path = prepare(c, "exchange.csv");
  const auto json_path = c.out_dir / "exchange_fit.json";
  write_atomic(csv_path, to_csv(trace));
  write_atomic(json_path, report.dump(2) + "\n");

  std::string fitted;
  for (std::size_t k = 1; k <= e.tones; ++k) {
    fitted += (k > 1 ? ", " : "") + fixed(fit.value("frequency_" + std::to_string(k)), 3);
  }
  return {"exchange: tones " + fitted + " kHz (model " + fixed(expected[0], 3) + ", " +
              fixed(expected[1], 3) + ", " + fixed(expected[2], 3) + ")",
          {csv_path, json_path}};
}

CommandResult run_berry(const RunConfig& c) {
  const auto& b = c.berry;
  const CurvatureModel model = c.model.curvature_model();
  const PathFamily family = parse_path_family(b.family);
  const double T = b.T_us * 1e-3;
  const PathPair pair =
      build_path_pair(model, family, T, b.waypoints, family_options(b.profile, b.loops));
  InterferenceResult r = run_interference(model, pair, T, default_fringe_delays(model), b.contrast);
  if (b.shots > 0) {
    r.enclosing = sample_shots(r.enclosing, b.shots, derive_seed(c.seed, 0));
    r.non_enclosing = sample_shots(r.non_enclosing, b.shots, derive_seed(c.seed, 1));
  }
  const FringeComparison cmp = compare_fringes(r.enclosing, r.non_enclosing);
  const BerryPhase be = discrete_berry_phase(model, pair.enclosing, Band::Middle);
  const BerryPhase bn = discrete_berry_phase(model, pair.non_enclosing, Band::Middle);

  ordered_json report;
  report["family"] = b.family;
  report["profile"] = b.profile;
  report["T_us"] = b.T_us;
  report["dphi_rad"] = cmp.dphi;
  report["dphi_over_pi"] = cmp.dphi / kPi;
  report["reliable"] = cmp.reliable;
  report["winding"] = {pair.enclosing.winding, pair.non_enclosing.winding};
  report["berry_phase_rad"] = {be.snapped, bn.snapped};
  report["populations_enclosing"] = r.populations_enclosing;
  report["populations_non_enclosing"] = r.populations_non_enclosing;
  report["fit_enclosing"] = fit_json(cmp.fit_a);
  report["fit_non_enclosing"] = fit_json(cmp.fit_b);

  const auto enc = prepare(c, "berry_enclosing.csv");
  const auto non = c.out_dir / "berry_non_enclosing.csv";
  const auto js = c.out_dir / "berry.json";
  write_atomic(enc, to_csv(r.enclosing));
  write_atomic(non, to_csv(r.non_enclosing));
  write_atomic(js, report.dump(2) + "\n");
  return {"berry: dphi = " + fixed(cmp.dphi / kPi, 3) + " pi (" + b.family + ", T = " +
              format_double(b.T_us) + " us)",
          {enc, non, js}};
}

CommandResult run_sweep(const RunConfig& c) {
  const auto& s = c.sweep;
  const CurvatureModel model = c.model.curvature_model();
  std::vector<double> T = parse_range_us(s.T_us);
  for (double& t : T) t *= 1e-3;
  SweepOptions o;
  o.waypoints = s.waypoints;
  o.family = family_options(s.profile, c.berry.loops);
  o.threads = c.threads;
  const auto points = adiabaticity_sweep(model, parse_path_family(s.family), T, {}, o);

  std::string csv = "T_us,dphi_rad,dphi_over_pi,flagged\n";
  std::size_t flagged = 0;
  double lo = kPi;
  double hi = 0.0;
  for (const SweepPoint& p : points) {
    csv += format_double(p.T_ms * 1e3) + ',' + format_double(p.dphi) + ',' +
           format_double(p.dphi / kPi) + ',' + (p.flagged ? "1" : "0") + '\n';
    flagged += p.flagged;
    lo = std::min(lo, p.dphi);
    hi = std::max(hi, p.dphi);
  }
  const auto path = prepare(c, "sweep.csv");
  write_atomic(path, csv);
  return {"sweep: " + std::to_string(points.size()) + " points, dphi/pi in [" + fixed(lo / kPi, 3) +
              ", " + fixed(hi / kPi, 3) + "], " + std::to_string(flagged) + " flagged",
          {path}};
}

CommandResult run_fit_spectrum(const RunConfig& c) {
  const auto& f = c.fit_spectrum;
  const SpectrumMap map =
      spectrum_from_csv(read_file(f.input, "$.fit_spectrum.input"), c.model.f_R_kHz);
  PeakExtractionOptions opts;
  opts.window_points = f.window_points;
  opts.linewidth_kHz = f.linewidth_kHz;
  const auto rows = extract_peak_centers(map, opts);
  if (rows.size() < 4) {
    throw Error(ErrorKind::BranchAssignment, "only " + std::to_string(rows.size()) +
                                                 " voltages show three resolved peaks");
  }
  const FitResult fit = extract_model_params(rows);

  BootstrapResult boot;
  const BootstrapResult* bp = nullptr;
  if (f.trials > 0) {
    boot = bootstrap_ci(
        rows.size(),
        [&](std::span<const std::size_t> idx) {
          std::vector<PeakRow> sub;
          sub.reserve(idx.size());
          for (std::size_t i : idx) sub.push_back(rows[i]);
          return extract_model_params(sub);
        },
        f.trials, c.seed, c.threads);
    bp = &boot;
  }

  std::string csv = "dVA_mV,f1_kHz,f2_kHz,f3_kHz\n";
  for (const PeakRow& r : rows) {
    csv += format_double(r.dV_mV);
    for (double v : r.centers_kHz) csv += ',' + format_double(v);
    csv += '\n';
  }
  ordered_json report = fit_json(fit, bp);
  report["voltages_used"] = rows.size();
  const auto peaks = prepare(c, "peaks.csv");
  const auto js = c.out_dir / "fit_spectrum.json";
  write_atomic(peaks, csv);
  write_atomic(js, report.dump(2) + "\n");
  return {"fit-spectrum: c = " + fixed(fit.value("c_per_mV"), 4) + " /mV, alpha = " +
              fixed(fit.value("alpha"), 4) + ", delta_f = " + fixed(fit.value("delta_f_kHz"), 4) +
              " kHz (" + std::to_string(rows.size()) + " voltages)",
          {peaks, js}};
}

CommandResult run_fit_fringes(const RunConfig& c) {
  const auto& f = c.fit_fringes;
  const FringeTrace a = fringe_from_csv(read_file(f.input, "$.fit_fringes.input"));
  const auto js = prepare(c, "fit_fringes.json");

  if (f.input_b.empty()) {
    const FitResult fit = fringe_fit(a, f.tones);
    BootstrapResult boot;
    const BootstrapResult* bp = nullptr;
    if (f.trials > 0) {
      boot = bootstrap_ci(
          a.size(),
          [&](std::span<const std::size_t> idx) { return fringe_fit(resample(a, idx), f.tones); },
          f.trials, c.seed, c.threads);
      bp = &boot;
    }
    write_atomic(js, fit_json(fit, bp).dump(2) + "\n");
    const std::string key = f.tones == 1 ? "frequency" : "frequency_1";
    return {"fit-fringes: frequency = " + fixed(fit.value(key), 4) + " kHz", {js}};
  }

  const FringeTrace b = fringe_from_csv(read_file(f.input_b, "$.fit_fringes.input_b"));
  if (b.delays_ms != a.delays_ms) {
    throw Error(ErrorKind::InvalidArgument, "paired fringe traces must share delays");
  }
  const FringeComparison cmp = compare_fringes(a, b);
  FitResult summary;
  summary.set("dphi", cmp.dphi);
  summary.converged = cmp.fit_a.converged && cmp.fit_b.converged;
  summary.reliable = cmp.reliable;
  BootstrapResult boot;
  const BootstrapResult* bp = nullptr;
  if (f.trials > 0) {
    boot = bootstrap_ci(
        a.size(),
        [&](std::span<const std::size_t> idx) {
          const FringeComparison r = compare_fringes(resample(a, idx), resample(b, idx));
          FitResult out;
          out.set("dphi", r.dphi);
          out.converged = r.fit_a.converged && r.fit_b.converged;
          return out;
        },
        f.trials, c.seed, c.threads);
    bp = &boot;
  }
  ordered_json report = fit_json(summary, bp);
  report["dphi_over_pi"] = cmp.dphi / kPi;
  report["reliable"] = cmp.reliable;
  report["fit_a"] = fit_json(cmp.fit_a);
  report["fit_b"] = fit_json(cmp.fit_b);
  write_atomic(js, report.dump(2) + "\n");
  return {"fit-fringes: dphi = " + fixed(cmp.dphi / kPi, 3) + " pi", {js}};
}

}  // namespace ionmodes::cli
