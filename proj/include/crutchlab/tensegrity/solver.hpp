#pragma once

#include <Eigen/Core>

#include <map>
#include <vector>

#include "crutchlab/tensegrity/topology.hpp"

namespace crutchlab::tensegrity {

class NonConvergence : public Error {
 public:
  NonConvergence(int iterations, double residual, const std::string& context = {});
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class MechanismSingularity : public Error {
 public:
  using Error::Error;
};

/// External nodal forces keyed by node id, N.
struct LoadCase {
  std::map<int, Vec3> forces;

  static LoadCase uniform_vertical(const Topology& topology, NodeRole role, double total_z);
};

/// Vertical offsets of ground-contact nodes keyed by node id, m. Nodes not
/// listed stay at height offset 0.
struct Terrain {
  std::map<int, double> offsets;

  void validate(const Topology& topology) const;
};

struct Configuration {
  Topology topology;
  Coordinates coords;
  Eigen::VectorXd member_forces;  // N, tension positive
  std::vector<int> supports;      // node ids with prescribed positions
  Coordinates loads;              // applied external forces, N
  Coordinates reactions;          // support reactions, zero at free nodes
  bool failure_warning = false;   // some |force| >= failure_load
  int iterations = 0;
  double residual = 0.0;          // max-norm over free DOFs, N
};

struct SolverOptions {
  double tolerance = 1e-6;  // N, max-norm of the free residual
  int max_iterations = 200;
  bool dynamic_relaxation_fallback = true;
  int dr_max_iterations = 50000;
  double min_increment = 1.0 / 4096.0;  // continuation floor
  int prestress_substeps = 10;
};

Eigen::VectorXd member_lengths(const Topology& topology, const Coordinates& coords);

/// Axial force t = EA (L - L0) / L0 with L0 the effective rest length;
/// cables under compression carry zero.
Eigen::VectorXd member_forces(const Topology& topology, const Coordinates& coords);

/// Nodal internal force g(x) = A(x) diag(1/L) t(x); equilibrium is g = f.
Coordinates internal_forces(const Topology& topology, const Coordinates& coords);

/// Derivative of internal_forces with respect to the stacked coordinates.
/// Material part EA/L0 e e^T plus geometric part t/L (I - e e^T) per member;
/// slack cables contribute nothing.
Eigen::MatrixXd tangent_stiffness(const Topology& topology, const Coordinates& coords);
Eigen::MatrixXd tangent_stiffness(const Configuration& config);

/// Minimum eigenvalue of the tangent stiffness restricted to unsupported
/// DOFs. Positive at stable equilibria.
double constrained_min_eigenvalue(const Configuration& config);

struct EquilibriumResult {
  Coordinates coords;
  int iterations = 0;
  double residual = 0.0;
};

/// Newton solve of g(x) = f for the DOFs of nodes not in `fixed` (node
/// indices); fixed nodes keep their positions in `start`. With no fixed
/// nodes the minimum-norm step removes rigid-body drift.
EquilibriumResult solve_equilibrium(const Topology& topology, const Coordinates& start,
                                    const std::vector<std::size_t>& fixed, const Coordinates& loads,
                                    const SolverOptions& options = {});

/// Continuation from `start` (an equilibrium for its own fixed positions and
/// `start_loads`) to the targets, with adaptive bisection of the increment.
EquilibriumResult solve_with_continuation(const Topology& topology, const Coordinates& start,
                                          const std::vector<std::size_t>& fixed,
                                          const Coordinates& target_fixed_positions,
                                          const Coordinates& start_loads, const Coordinates& target_loads,
                                          const SolverOptions& options = {});

/// Free-standing unloaded equilibrium after extending every strut by
/// `strut_extension`, translated so the ground-contact nodes average z = 0.
/// Supports of the result are the ground-contact nodes.
Configuration apply_prestress(const Topology& topology, double strut_extension, const SolverOptions& options = {});

/// Static equilibrium under `loads` with ground-contact nodes pinned at their
/// current position raised by the terrain offsets.
Configuration solve_static(const Configuration& config, const LoadCase& loads, const Terrain& terrain,
                           const SolverOptions& options = {});

/// Fill forces, reactions and the failure flag of a configuration from its
/// coordinates.
void refresh_state(Configuration& config);

}  // namespace crutchlab::tensegrity
