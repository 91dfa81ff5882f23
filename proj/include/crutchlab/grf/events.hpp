#pragma once

#include <vector>

#include "crutchlab/grf/types.hpp"

namespace crutchlab::grf {

struct DetectionOptions {
  double threshold = 20.0;      // N
  double min_duration = 0.010;  // s
};

struct StrikeDetection {
  std::vector<StrikeEvent> events;
  /// Supra-threshold runs shorter than min_duration.
  std::vector<StrikeEvent> short_runs;
};

/// Runs of vertical force >= threshold lasting at least min_duration
/// (round(min_duration * rate) samples). Sub-threshold dips shorter than
/// min_duration are bridged and do not split a run.
StrikeDetection detect_strikes(const ForceSeries& series, const DetectionOptions& options = {});

std::vector<StrikeEvent> detect_crutch_strikes(const ForceSeries& series, double threshold = 20.0,
                                               double min_duration = 0.010);

}  // namespace crutchlab::grf
