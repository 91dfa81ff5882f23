#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "crutchlab/lmm/design.hpp"

namespace crutchlab::lmm {

struct SimulationDesign {
  int participants = 18;
  int blocks = 2;
  int trials = 4;
  /// Even-numbered blocks are turning blocks.
  bool turning_blocks = false;
};

struct SimulationTruth {
  ModelSpec spec;         // response name and fixed-effect terms
  Eigen::VectorXd beta;   // one entry per design column
  double var_participant = 0.0;
  double var_residual = 1.0;
};

/// Every participant uses every device in every block; ids P01, P02, ...
/// Deterministic for a given seed.
LongDataset simulate_dataset(const SimulationTruth& truth, const SimulationDesign& design, std::uint64_t seed);

}  // namespace crutchlab::lmm
