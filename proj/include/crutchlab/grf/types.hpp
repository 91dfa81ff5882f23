#pragma once

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <tuple>

#include "crutchlab/lmm/dataset.hpp"

namespace crutchlab::grf {

using lmm::Device;

enum Axis : Eigen::Index { AP = 0, ML = 1, Vertical = 2 };

/// Triaxial force-plate signal; row 0 AP, row 1 ML, row 2 vertical, N.
struct ForceSeries {
  double sample_rate = 1000.0;  // Hz
  Eigen::Matrix3Xd samples;
  int plate_id = 0;

  Eigen::Index size() const { return samples.cols(); }
  void validate() const;
};

/// Samples onset..offset inclusive.
struct StrikeEvent {
  Eigen::Index onset = 0;
  Eigen::Index offset = 0;
};

struct TrialKey {
  std::string participant;
  Device device = Device::Rigid;
  int block = 0;
  int trial = 0;

  auto tie() const { return std::tie(participant, device, block, trial); }
  bool operator<(const TrialKey& o) const { return tie() < o.tie(); }
  bool operator==(const TrialKey& o) const { return tie() == o.tie(); }
  std::string label() const;
};

/// Questionnaire scores of the block the trial belongs to.
struct Questionnaire {
  std::optional<double> borg;       // 0..10
  std::optional<double> comfort;    // -3..3
  std::optional<double> stability;  // -3..3
  std::optional<double> pain;       // 0..10
  std::optional<double> sus;        // 0..100

  void validate() const;
  bool empty() const { return !borg && !comfort && !stability && !pain && !sus; }
};

struct TrialRecord {
  TrialKey key;
  bool turning = false;
  double body_weight = 0.0;  // N
  Questionnaire questionnaire;

  void validate() const;
};

struct StanceCycle {
  Eigen::Matrix3Xd force;  // rows as ForceSeries
  double sample_rate = 1000.0;
  double duration = 0.0;  // (offset - onset) / rate, s
  double body_weight = 0.0;
  TrialKey key;
  int plate_id = 0;
  StrikeEvent event;

  Eigen::Index size() const { return force.cols(); }
};

/// Cut a stance out of a series.
StanceCycle make_stance(const ForceSeries& series, const StrikeEvent& event, double body_weight, const TrialKey& key = {});

struct MarkerTrack {
  double sample_rate = 100.0;  // Hz
  Eigen::Matrix3Xd positions;  // m
};

}  // namespace crutchlab::grf
