#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crutchlab/app/synth.hpp"
#include "crutchlab/grf/trials.hpp"
#include "crutchlab/lmm/ladder.hpp"
#include "crutchlab/tensegrity/calibration.hpp"

namespace crutchlab::app {

inline constexpr const char* kVersion = "1.0.0";

struct SimulateConfig {
  std::filesystem::path out = "simulate_out";
  std::optional<std::filesystem::path> topology;  // JSON; default is the built-in column
  double strut_extension = tensegrity::CalibratedDefaults::strut_extension;
  std::optional<double> cable_axial_rigidity;  // N; default: from topology / calibration
  bool profile = false;
  bool terrain_case = false;
  double max_load = 1100.0;
  int steps = 22;
  /// "flat", "raisedKxMmm" (first K ground nodes raised by M mm), or a JSON
  /// file {"offsets_m": {"<node id>": dz}}.
  std::string terrain = "raised2x5mm";
  double top_load = 500.0;        // N, total on the top nodes
  double module_limit = 2000.0;   // N
  tensegrity::SpringModel spring;
  tensegrity::RigidModel rigid;
};

struct AnalyzeConfig {
  std::filesystem::path input;
  std::filesystem::path out = "analyze_out";
  grf::PipelineOptions pipeline;
};

struct FitConfig {
  std::filesystem::path input;
  std::filesystem::path out = "fit_out";
  std::vector<std::string> responses;  // empty: every response in the file
  std::string ladder = "auto";         // auto, kinetic, speed, questionnaire, none
  bool reml = false;
  double alpha = 0.05;
  std::string baseline = "rigid";
};

struct SynthConfig {
  std::filesystem::path out = "synth_out";
  SynthSpec spec;
};

struct CalibrateConfig {
  std::filesystem::path out = "calibrate_out";
  tensegrity::CalibrationTargets targets;
};

/// Each command stages its outputs and commits them with a manifest; any
/// exception leaves the output directory untouched.
io::RunManifest cmd_simulate(const SimulateConfig& config);
io::RunManifest cmd_analyze(const AnalyzeConfig& config);
io::RunManifest cmd_fit(const FitConfig& config);
io::RunManifest cmd_synth(const SynthConfig& config);
io::RunManifest cmd_calibrate(const CalibrateConfig& config);

/// Terrain from the `--terrain` notation.
tensegrity::Terrain parse_terrain(const std::string& spec, const tensegrity::Topology& topology);

}  // namespace crutchlab::app
