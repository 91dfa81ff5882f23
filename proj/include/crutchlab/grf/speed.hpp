#pragma once

#include "crutchlab/grf/types.hpp"

namespace crutchlab::grf {

/// Mean absolute per-sample displacement along the dominant horizontal
/// direction, times the sample rate, m/s.
double walking_speed(const MarkerTrack& track);

}  // namespace crutchlab::grf
