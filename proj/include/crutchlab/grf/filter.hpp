#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

#include "crutchlab/grf/types.hpp"

namespace crutchlab::grf {

/// Second-order section b0 b1 b2 / 1 a1 a2.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 2> a{};
};

/// Digital Butterworth lowpass as cascaded sections (bilinear transform
/// with prewarping). Each section has unit DC gain.
std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_rate);

/// |H(f)| of the cascade for one pass.
double magnitude_response(const std::vector<Biquad>& sos, double f_hz, double sample_rate);

/// Forward-backward filtering of one channel with odd-extension padding and
/// steady-state initial conditions.
Eigen::VectorXd filtfilt(const std::vector<Biquad>& sos, const Eigen::VectorXd& x);

/// Zero-phase Butterworth lowpass of every channel.
ForceSeries lowpass_filter(const ForceSeries& series, int order = 4, double cutoff_hz = 50.0);

}  // namespace crutchlab::grf
