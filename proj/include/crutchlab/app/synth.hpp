#pragma once

#include <array>
#include <cstdint>

#include "json.hpp"

#include "crutchlab/io/manifest.hpp"
#include "crutchlab/lmm/dataset.hpp"

namespace crutchlab::app {

/// Baseline (rigid) value plus spring and tensegrity offsets.
struct DeviceEffects {
  double rigid = 0.0;
  double spring = 0.0;
  double tensegrity = 0.0;

  double of(lmm::Device d) const;
};

struct SynthSpec {
  std::uint64_t seed = 1;
  int participants = 18;
  int trials = 4;  // per block
  int plates = 2;  // force plates (one strike each) per trial
  double force_rate = 1000.0;
  double marker_rate = 100.0;
  double force_noise = 0.5;  // N, white noise on every channel

  DeviceEffects plr_vertical{5.7, -2.73, -3.09};  // BW/s
  double plr_var_participant = 0.4;
  double plr_var_residual = 0.3;
  double plr_floor = 1.2;  // BW/s, drawn rates are clipped here

  DeviceEffects speed_straight{0.79, -0.027, -0.016};  // m/s
  DeviceEffects speed_turning{0.57, -0.047, -0.016};
  double speed_var_participant = 0.02;
  double speed_var_residual = 0.004;

  DeviceEffects borg{4.0, 0.37, -0.19};
  double borg_turning = -0.46;
  double score_var_participant = 1.5;
  double score_var_residual = 0.5;

  nlohmann::json to_json() const;
};

/// Writes one directory per trial (`meta.json`, `force_<plate>.csv`,
/// `marker.csv`) plus `truth.json`. Every participant walks a straight and a
/// turning path with each device: blocks 1-3 straight, 4-6 turning, device
/// order shuffled per path. Questionnaire scores ride on trial 1 of a block.
void write_synth_bundle(const SynthSpec& spec, io::OutputStage& stage);

}  // namespace crutchlab::app
