#pragma once

#include "crutchlab/tensegrity/profile.hpp"

namespace crutchlab::tensegrity {

struct CalibrationTargets {
  double initial_stiffness = 16300.0;  // N/m, tangent at zero load
  double loaded_stiffness = 121300.0;  // N/m, tangent at `loaded_at`
  double loaded_at = 1000.0;           // N
};

struct CalibrationResult {
  double strut_extension = 0.0;      // m
  double cable_axial_rigidity = 0.0;  // N
  double initial_stiffness = 0.0;    // N/m, achieved
  double loaded_stiffness = 0.0;     // N/m, achieved
  int evaluations = 0;
  double cost = 0.0;                 // sum of squared log-residuals
};

struct CalibrationStart {
  double strut_extension = 0.004;
  double cable_axial_rigidity = 1.0e4;
};

/// Tangent stiffness of the plate-held column at zero load and at
/// `targets.loaded_at` for the given member properties.
std::pair<double, double> anchor_stiffnesses(const Topology& base, double strut_extension, double cable_axial_rigidity,
                                             double loaded_at, const SolverOptions& options = {});

/// Least-squares fit of strut extension and cable EA (in log space) to the
/// two stiffness anchors. `base` supplies geometry and strut properties.
CalibrationResult calibrate(const Topology& base, const CalibrationTargets& targets = {},
                            const CalibrationStart& start = {}, const SolverOptions& options = {});

/// Shipped result of calibrate() on the default column; mirrored in
/// config/column_defaults.json.
struct CalibratedDefaults {
  static constexpr double strut_extension = 0.0180728479063112;
  static constexpr double cable_axial_rigidity = 2339.494831944;
};

/// Default column with the calibrated cable EA (struts not yet extended).
Topology calibrated_topology();
/// Prestressed calibrated default column.
Configuration calibrated_configuration(const SolverOptions& options = {});

}  // namespace crutchlab::tensegrity
