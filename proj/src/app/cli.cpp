#include "crutchlab/app/cli.hpp"

#include <cstdlib>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "crutchlab/app/commands.hpp"

namespace crutchlab::app {

namespace {

void setup_logging() {
  static bool done = false;
  if (!done) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("crutchlab"));
    spdlog::set_pattern("[%l] %v");
    done = true;
  }
  const char* env = std::getenv("CRUTCHLAB_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

void report(const io::RunManifest& m, const std::filesystem::path& out) {
  std::cout << m.command << ": wrote " << m.outputs.size() << " files to " << out.string() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args) {
  setup_logging();
  CLI::App app{"Tensegrity crutch workbench: structural simulation, GRF processing and mixed-model fitting",
               "crutchlab"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML/INI file whose keys mirror the long flag names");
  app.require_subcommand(1);

  SimulateConfig sim;
  double sim_cable_ea = 0.0;
  std::string sim_topology;
  auto* simulate = app.add_subcommand("simulate", "Stiffness profiles and terrain conformance of the column");
  simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();
  simulate->add_option("--topology", sim_topology, "Topology JSON (default: built-in calibrated column)");
  simulate->add_option("--strut-extension", sim.strut_extension, "Nut-turn strut extension (m)")->capture_default_str();
  auto* ea_opt = simulate->add_option("--cable-ea", sim_cable_ea, "Cable axial rigidity override (N)");
  simulate->add_flag("--profile", sim.profile, "Three-device load-displacement comparison");
  auto* terrain_flag = simulate->add_option("--terrain", sim.terrain, "flat, raisedKxMmm or a JSON offsets file")
                           ->capture_default_str();
  simulate->add_option("--max-load", sim.max_load, "Profile end load (N)")->capture_default_str();
  simulate->add_option("--steps", sim.steps, "Profile load steps")->capture_default_str();
  simulate->add_option("--top-load", sim.top_load, "Terrain case load on the top nodes (N)")->capture_default_str();
  simulate->add_option("--module-failure-load", sim.module_limit, "Module failure load (N)")->capture_default_str();
  simulate->add_option("--spring-stiffness", sim.spring.stiffness, "Spring crutch stiffness (N/m)")->capture_default_str();
  simulate->add_option("--spring-travel", sim.spring.travel, "Spring crutch travel (m)")->capture_default_str();
  simulate->add_option("--rigid-stiffness", sim.rigid.stiffness, "Rigid crutch stiffness (N/m)")->capture_default_str();

  AnalyzeConfig ana;
  bool no_filter = false;
  auto* analyze = app.add_subcommand("analyze", "Strike detection, stance validation and kinetics of a trial set");
  analyze->add_option("--input", ana.input, "Study directory (one sub-directory per trial)")->required();
  analyze->add_option("--out", ana.out, "Output directory")->capture_default_str();
  analyze->add_flag("--no-filter", no_filter, "Skip the low-pass filter");
  analyze->add_option("--filter-order", ana.pipeline.filter_order, "Butterworth order")->capture_default_str();
  analyze->add_option("--cutoff-hz", ana.pipeline.cutoff_hz, "Low-pass cutoff (Hz)")->capture_default_str();
  analyze->add_option("--threshold", ana.pipeline.detection.threshold, "Strike threshold (N)")->capture_default_str();
  analyze->add_option("--min-strike", ana.pipeline.detection.min_duration, "Minimum strike duration (s)")->capture_default_str();
  analyze->add_option("--min-stance", ana.pipeline.criteria.min_duration, "Minimum stance duration (s)")->capture_default_str();
  analyze->add_option("--min-peak", ana.pipeline.criteria.min_peak_fraction, "Minimum peak (fraction of BW)")->capture_default_str();
  analyze->add_option("--rising-fraction", ana.pipeline.criteria.rising_fraction, "Early-stance rising window (fraction)")->capture_default_str();
  analyze->add_option("--plr-window", ana.pipeline.loading.window, "Loading-rate search window (s)")->capture_default_str();
  analyze->add_option("--plr-bin", ana.pipeline.loading.bin, "Loading-rate bin (s)")->capture_default_str();

  FitConfig fit;
  auto* fitc = app.add_subcommand("fit", "Random-intercept model ladders on a long-format CSV");
  fitc->add_option("--input", fit.input, "Long-format CSV")->required();
  fitc->add_option("--out", fit.out, "Output directory")->capture_default_str();
  fitc->add_option("--response", fit.responses, "Response(s) to fit (default: all)");
  fitc->add_option("--ladder", fit.ladder, "auto, kinetic, speed, questionnaire or none")
      ->check(CLI::IsMember({"auto", "kinetic", "speed", "questionnaire", "none"}))
      ->capture_default_str();
  fitc->add_flag("--reml", fit.reml, "REML estimation (only with --ladder none)");
  fitc->add_option("--alpha", fit.alpha, "Ladder step significance level")->capture_default_str();
  fitc->add_option("--baseline", fit.baseline, "Reference device")
      ->check(CLI::IsMember({"rigid", "spring", "tensegrity"}))
      ->capture_default_str();

  SynthConfig syn;
  bool zero_effects = false;
  auto* synth = app.add_subcommand("synth", "Synthetic study bundle with known effects");
  synth->add_option("--out", syn.out, "Output directory")->capture_default_str();
  synth->add_option("--seed", syn.spec.seed, "Random seed")->capture_default_str();
  synth->add_option("--participants", syn.spec.participants, "Participants")->capture_default_str();
  synth->add_option("--trials", syn.spec.trials, "Trials per block")->capture_default_str();
  synth->add_option("--plates", syn.spec.plates, "Force plates per trial")->capture_default_str();
  synth->add_option("--plr-rigid", syn.spec.plr_vertical.rigid, "Rigid vertical loading rate (BW/s)")->capture_default_str();
  synth->add_option("--plr-spring", syn.spec.plr_vertical.spring, "Spring offset (BW/s)")->capture_default_str();
  synth->add_option("--plr-tensegrity", syn.spec.plr_vertical.tensegrity, "Tensegrity offset (BW/s)")->capture_default_str();
  synth->add_option("--plr-var-participant", syn.spec.plr_var_participant, "Participant variance")->capture_default_str();
  synth->add_option("--plr-var-residual", syn.spec.plr_var_residual, "Residual variance")->capture_default_str();
  synth->add_flag("--zero-effects", zero_effects, "Set every device and turning offset to 0");

  CalibrateConfig cal;
  auto* calibrate = app.add_subcommand("calibrate", "Fit strut extension and cable EA to the stiffness anchors");
  calibrate->add_option("--out", cal.out, "Output directory")->capture_default_str();
  calibrate->add_option("--k0", cal.targets.initial_stiffness, "Tangent stiffness at 0 N (N/m)")->capture_default_str();
  calibrate->add_option("--k-loaded", cal.targets.loaded_stiffness, "Tangent stiffness at the loaded anchor (N/m)")->capture_default_str();
  calibrate->add_option("--loaded-at", cal.targets.loaded_at, "Loaded anchor (N)")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (simulate->parsed()) {
      if (!sim_topology.empty()) sim.topology = sim_topology;
      if (ea_opt->count()) sim.cable_axial_rigidity = sim_cable_ea;
      sim.terrain_case = terrain_flag->count() > 0;
      report(cmd_simulate(sim), sim.out);
    } else if (analyze->parsed()) {
      ana.pipeline.filter = !no_filter;
      report(cmd_analyze(ana), ana.out);
    } else if (fitc->parsed()) {
      report(cmd_fit(fit), fit.out);
    } else if (synth->parsed()) {
      if (zero_effects) {
        auto& s = syn.spec;
        s.plr_vertical.spring = s.plr_vertical.tensegrity = 0.0;
        s.speed_straight.spring = s.speed_straight.tensegrity = 0.0;
        s.speed_turning.spring = s.speed_turning.tensegrity = 0.0;
        s.borg.spring = s.borg.tensegrity = s.borg_turning = 0.0;
      }
      report(cmd_synth(syn), syn.out);
    } else if (calibrate->parsed()) {
      report(cmd_calibrate(cal), cal.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace crutchlab::app
