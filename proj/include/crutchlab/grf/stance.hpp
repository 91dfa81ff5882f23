#pragma once

#include <Eigen/Core>

#include <string>

#include "crutchlab/grf/types.hpp"

namespace crutchlab::grf {

struct StanceCriteria {
  double min_duration = 0.400;      // s
  double min_peak_fraction = 1.0 / 3.0;  // of body weight
  double rising_fraction = 0.10;    // of stance
};

struct StanceVerdict {
  bool duration_ok = false;
  bool peak_ok = false;
  bool rising_ok = false;

  bool accepted() const { return duration_ok && peak_ok && rising_ok; }
  /// Semicolon-separated failed criteria, empty when accepted.
  std::string reasons() const;
};

/// Rising rule: vertical force at rising_fraction of stance (interpolated)
/// exceeds the onset force, and the least-squares slope over the samples up
/// to that point is positive.
StanceVerdict validate_stance(const StanceCycle& cycle, const StanceCriteria& criteria = {});

inline constexpr int kNormalizedPoints = 101;

/// Forces in body weights at 0, 1, ..., 100 % stance; columns are points.
struct NormalizedStance {
  Eigen::Matrix<double, 3, kNormalizedPoints> bw;
};

NormalizedStance normalize_stance(const StanceCycle& cycle);

/// Linear interpolation of samples y at fractional index s in [0, n-1].
double interpolate(const Eigen::Ref<const Eigen::VectorXd>& y, double s);

}  // namespace crutchlab::grf
