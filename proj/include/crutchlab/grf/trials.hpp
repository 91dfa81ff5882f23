#pragma once

#include <map>
#include <vector>

#include "crutchlab/grf/events.hpp"
#include "crutchlab/grf/kinetics.hpp"
#include "crutchlab/grf/stance.hpp"

namespace crutchlab::grf {

struct PipelineOptions {
  bool filter = true;
  int filter_order = 4;
  double cutoff_hz = 50.0;
  DetectionOptions detection;
  StanceCriteria criteria;
  LoadingRateOptions loading;
};

struct TrialInputs {
  std::map<TrialKey, std::vector<ForceSeries>> forces;
  std::map<TrialKey, MarkerTrack> markers;
  std::map<TrialKey, TrialRecord> metadata;
};

struct StanceRecord {
  TrialKey key;
  int plate_id = 0;
  int stance_index = 0;  // within the trial
  StrikeEvent event;
  double duration = 0.0;
  LoadingRate loading_rate;
  Impulses impulses;
  NormalizedStance normalized;
};

struct Rejection {
  TrialKey key;
  int plate_id = 0;
  StrikeEvent event;
  std::string reasons;
};

struct Summary {
  lmm::LongDataset data;
  std::vector<StanceRecord> stances;
  std::vector<Rejection> rejections;
};

/// Response names written to the long dataset.
namespace response {
inline constexpr const char* kPlrVertical = "plr_vertical";
inline constexpr const char* kPlrAp = "plr_ap";
inline constexpr const char* kPlrMl = "plr_ml";
inline constexpr const char* kImpulseVertical = "impulse_vertical";
inline constexpr const char* kImpulseBraking = "impulse_ap_braking";
inline constexpr const char* kImpulsePropulsive = "impulse_ap_propulsive";
inline constexpr const char* kImpulseMl = "impulse_ml";
inline constexpr const char* kStanceDuration = "stance_duration";
inline constexpr const char* kSpeedStraight = "speed_straight";
inline constexpr const char* kSpeedTurning = "speed_turning";
}  // namespace response

/// Filter, detect, validate and summarize every trial. Per valid stance one
/// row per kinetic response; per trial with a marker track one speed row;
/// per trial carrying questionnaire scores one row per score. Rows come out
/// in canonical order.
Summary summarize_trials(const TrialInputs& inputs, const PipelineOptions& options = {});

}  // namespace crutchlab::grf
