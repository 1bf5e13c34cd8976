#include "cli.hpp"

#include <functional>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "ionmodes/error.hpp"

namespace ionmodes::cli {
namespace {

void report_error(std::ostream& err, std::string_view command, std::string_view kind,
                  std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["command"] = command;
  j["message"] = message;
  err << j.dump() << '\n';
}

// Options registered on the command line; applied over the config file only
// when actually given.
class Overrides {
 public:
  template <typename T>
  CLI::Option* bind(CLI::App* app, const std::string& flag, std::function<T&(RunConfig&)> field,
                    const std::string& help) {
    auto value = std::make_shared<T>(field(defaults_));
    CLI::Option* opt = app->add_option(flag, *value, help)->capture_default_str();
    apply_.push_back([opt, value, field](RunConfig& c) {
      if (opt->count() > 0) field(c) = *value;
    });
    return opt;
  }

  void apply(RunConfig& c) const {
    for (const auto& f : apply_) f(c);
  }

 private:
  RunConfig defaults_;
  std::vector<std::function<void(RunConfig&)>> apply_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coupled three-site phonon mode simulator", "ionmodes"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override its values)");
  std::optional<std::string> out_dir;
  app.add_option("--out-dir", out_dir, "Output directory (default: current directory)");
  ov.bind<std::uint64_t>(&app, "--seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; },
                         "Random seed");
  ov.bind<unsigned>(&app, "--threads", [](RunConfig& c) -> unsigned& { return c.threads; },
                    "Worker threads");
  ov.bind<double>(&app, "--d0-um", [](RunConfig& c) -> double& { return c.model.d0_um; },
                  "Ion-site spacing (um)");
  ov.bind<double>(&app, "--theta-deg", [](RunConfig& c) -> double& { return c.model.theta_deg; },
                  "Radial-axis tilt (deg)");
  ov.bind<double>(&app, "--f-R-kHz", [](RunConfig& c) -> double& { return c.model.f_R_kHz; },
                  "Bare radial frequency (kHz)");
  ov.bind<double>(&app, "--delta-f-kHz",
                  [](RunConfig& c) -> double& { return c.model.delta_f_kHz; },
                  "Coupling frequency shift (kHz)");
  ov.bind<double>(&app, "--c-per-mV", [](RunConfig& c) -> double& { return c.model.c_per_mV; },
                  "Shim gain (1/mV)");
  ov.bind<double>(&app, "--alpha", [](RunConfig& c) -> double& { return c.model.alpha; },
                  "Shim cross-talk ratio");

  std::map<std::string, std::function<CommandResult(const RunConfig&)>> run;

  CLI::App* surfaces = app.add_subcommand("surfaces", "Eigenvalue surfaces on a square shim grid");
  ov.bind<std::size_t>(surfaces, "--grid", [](RunConfig& c) -> std::size_t& { return c.surfaces.grid; },
                       "Points per axis");
  ov.bind<double>(surfaces, "--range", [](RunConfig& c) -> double& { return c.surfaces.range; },
                  "Half-width of the grid in shim units");
  run["surfaces"] = run_surfaces;

  CLI::App* spectrum = app.add_subcommand("spectrum", "Synthetic spectrum map versus dV_A");
  ov.bind<double>(spectrum, "--dV-min", [](RunConfig& c) -> double& { return c.spectrum.dV_min_mV; }, "mV");
  ov.bind<double>(spectrum, "--dV-max", [](RunConfig& c) -> double& { return c.spectrum.dV_max_mV; }, "mV");
  ov.bind<double>(spectrum, "--dV-step", [](RunConfig& c) -> double& { return c.spectrum.dV_step_mV; }, "mV");
  ov.bind<double>(spectrum, "--df-min", [](RunConfig& c) -> double& { return c.spectrum.df_min_kHz; }, "kHz");
  ov.bind<double>(spectrum, "--df-max", [](RunConfig& c) -> double& { return c.spectrum.df_max_kHz; }, "kHz");
  ov.bind<double>(spectrum, "--df-step", [](RunConfig& c) -> double& { return c.spectrum.df_step_kHz; }, "kHz");
  ov.bind<double>(spectrum, "--linewidth", [](RunConfig& c) -> double& { return c.spectrum.linewidth_kHz; },
                  "Gaussian line sigma (kHz)");
  ov.bind<double>(spectrum, "--noise", [](RunConfig& c) -> double& { return c.spectrum.noise; },
                  "Noise in line heights");
  run["spectrum"] = run_spectrum;

  CLI::App* exchange = app.add_subcommand("exchange", "Static exchange trace from site C");
  ov.bind<double>(exchange, "--dV", [](RunConfig& c) -> double& { return c.exchange.dV_mV; }, "dV_A (mV)");
  ov.bind<double>(exchange, "--duration-ms", [](RunConfig& c) -> double& { return c.exchange.duration_ms; },
                  "Delay span (ms)");
  ov.bind<std::size_t>(exchange, "--points", [](RunConfig& c) -> std::size_t& { return c.exchange.points; },
                       "Delay points");
  ov.bind<double>(exchange, "--contrast", [](RunConfig& c) -> double& { return c.exchange.contrast; },
                  "Readout contrast");
  ov.bind<std::size_t>(exchange, "--shots", [](RunConfig& c) -> std::size_t& { return c.exchange.shots; },
                       "Shots per point (0 = ideal)");
  ov.bind<std::size_t>(exchange, "--tones", [](RunConfig& c) -> std::size_t& { return c.exchange.tones; },
                       "Sinusoids in the fit");
  run["exchange"] = run_exchange;

  CLI::App* berry = app.add_subcommand("berry", "Enclosing / non-enclosing fringe pair");
  ov.bind<std::string>(berry, "--family", [](RunConfig& c) -> std::string& { return c.berry.family; },
                       "canonical|larger|smaller|wavy|multiloop");
  ov.bind<double>(berry, "--T-us", [](RunConfig& c) -> double& { return c.berry.T_us; },
                  "Traversal time (us)");
  ov.bind<std::size_t>(berry, "--n", [](RunConfig& c) -> std::size_t& { return c.berry.waypoints; },
                       "Waypoints per leg");
  ov.bind<std::string>(berry, "--profile", [](RunConfig& c) -> std::string& { return c.berry.profile; },
                       "uniform|local-adiabatic");
  ov.bind<double>(berry, "--contrast", [](RunConfig& c) -> double& { return c.berry.contrast; },
                  "Readout contrast");
  ov.bind<std::size_t>(berry, "--shots", [](RunConfig& c) -> std::size_t& { return c.berry.shots; },
                       "Shots per point (0 = ideal)");
  ov.bind<int>(berry, "--loops", [](RunConfig& c) -> int& { return c.berry.loops; },
               "Windings for the multiloop family");
  run["berry"] = run_berry;

  CLI::App* sweep = app.add_subcommand("sweep", "Phase difference versus traversal time");
  ov.bind<std::string>(sweep, "--family", [](RunConfig& c) -> std::string& { return c.sweep.family; },
                       "Path family");
  ov.bind<std::string>(sweep, "--T-us", [](RunConfig& c) -> std::string& { return c.sweep.T_us; },
                       "a:b:step in us");
  ov.bind<std::size_t>(sweep, "--n", [](RunConfig& c) -> std::size_t& { return c.sweep.waypoints; },
                       "Waypoints per leg");
  ov.bind<std::string>(sweep, "--profile", [](RunConfig& c) -> std::string& { return c.sweep.profile; },
                       "uniform|local-adiabatic");
  run["sweep"] = run_sweep;

  CLI::App* fit_spectrum = app.add_subcommand("fit-spectrum", "Model parameters from a spectrum CSV");
  ov.bind<std::string>(fit_spectrum, "--input", [](RunConfig& c) -> std::string& { return c.fit_spectrum.input; },
                       "Spectrum CSV");
  ov.bind<std::size_t>(fit_spectrum, "--window",
                       [](RunConfig& c) -> std::size_t& { return c.fit_spectrum.window_points; },
                       "Points per Gaussian window");
  ov.bind<double>(fit_spectrum, "--linewidth",
                  [](RunConfig& c) -> double& { return c.fit_spectrum.linewidth_kHz; },
                  "Expected line sigma (kHz)");
  ov.bind<std::size_t>(fit_spectrum, "--trials",
                       [](RunConfig& c) -> std::size_t& { return c.fit_spectrum.trials; },
                       "Bootstrap trials (0 = none)");
  run["fit-spectrum"] = run_fit_spectrum;

  CLI::App* fit_fringes = app.add_subcommand("fit-fringes", "Sinusoid fits and phase difference");
  ov.bind<std::string>(fit_fringes, "--input", [](RunConfig& c) -> std::string& { return c.fit_fringes.input; },
                       "Fringe CSV");
  ov.bind<std::string>(fit_fringes, "--input-b",
                       [](RunConfig& c) -> std::string& { return c.fit_fringes.input_b; },
                       "Second fringe CSV for a phase difference");
  ov.bind<std::size_t>(fit_fringes, "--tones", [](RunConfig& c) -> std::size_t& { return c.fit_fringes.tones; },
                       "Sinusoids in the fit");
  ov.bind<std::size_t>(fit_fringes, "--trials",
                       [](RunConfig& c) -> std::size_t& { return c.fit_fringes.trials; },
                       "Bootstrap trials (0 = none)");
  run["fit-fringes"] = run_fit_fringes;

  std::string command = "ionmodes";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    for (const CLI::App* sub : app.get_subcommands()) command = sub->get_name();
    report_error(err, command, "usage", e.what());
    return kExitConfig;
  }
  command = app.get_subcommands().front()->get_name();

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    ov.apply(config);
    if (out_dir) config.out_dir = *out_dir;
    config = parse_config(to_json(config));
    const CommandResult r = run.at(command)(config);
    out << r.summary << '\n';
    return 0;
  } catch (const Error& e) {
    report_error(err, command, to_string(e.kind()), e.what());
    return is_numerical(e.kind()) ? kExitNumerical : kExitConfig;
  } catch (const std::exception& e) {
    report_error(err, command, "internal", e.what());
    return 1;
  }
}

}  // namespace ionmodes::cli
