#pragma once

#include <array>

#include "crutchlab/grf/types.hpp"

namespace crutchlab::grf {

struct LoadingRateOptions {
  double window = 0.200;  // s after strike
  double bin = 0.010;     // s
};

struct LoadingRate {
  std::array<double, 3> peak{};  // BW/s, indexed by Axis
  bool truncated = false;        // stance shorter than the window
};

/// Largest (F(t + bin) - F(t)) / bin over bins lying inside the window,
/// divided by body weight. Vertical keeps the sign; AP and ML use the slope
/// magnitude.
LoadingRate peak_loading_rate(const StanceCycle& cycle, const LoadingRateOptions& options = {});

struct Impulses {
  double vertical = 0.0;
  double ap_braking = 0.0;     // magnitude of the negative AP lobe
  double ap_propulsive = 0.0;  // positive AP lobe
  double ml = 0.0;             // integral of |ML|
};

/// Trapezoidal impulses over samples [first, last] in N*s/BW.
Impulses impulse_between(const StanceCycle& cycle, Eigen::Index first, Eigen::Index last);
Impulses stance_impulse(const StanceCycle& cycle);

}  // namespace crutchlab::grf
