#pragma once

#include <Eigen/Core>

#include "crutchlab/tensegrity/topology.hpp"

namespace crutchlab::tensegrity {

class NoSelfStress : public Error {
 public:
  using Error::Error;
};

class SignInfeasible : public Error {
 public:
  using Error::Error;
};

/// Force-density equilibrium matrix: column j carries +(x_a - x_b) in the
/// node-a block and -(x_a - x_b) in the node-b block, so A q is the nodal
/// internal force for force densities q.
Eigen::MatrixXd equilibrium_matrix(const Topology& topology, const Coordinates& coords);

struct SelfStress {
  Eigen::VectorXd force_densities;  // N/m, cables >= 0, struts <= 0, max |q| = 1
  int null_space_dimension = 0;
};

/// Self-stress of the structure at `coords`.
///
/// A one-dimensional null space is returned as is (after the sign flip).
/// With several independent states the one excited by a uniform strut
/// elongation is chosen, weighting members by their flexibility L/EA.
SelfStress find_self_stress(const Topology& topology, const Coordinates& coords);

/// Relative singular-value cut used for null spaces.
inline constexpr double kNullSpaceTolerance = 1e-10;

}  // namespace crutchlab::tensegrity
