#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "crutchlab/tensegrity/solver.hpp"

namespace crutchlab::tensegrity {

struct ProfilePoint {
  double load = 0.0;          // N, compressive axial load
  double displacement = 0.0;  // m, downward travel of the top
  double secant = 0.0;        // N/m
  double tangent = 0.0;       // N/m
};

using Profile = std::vector<ProfilePoint>;

/// Equilibrium with the top-attachment nodes held by a rigid plate (the
/// crutch shaft) that has dropped by `drop` from the prestressed position.
struct PlateState {
  Configuration config;  // supports: ground-contact and top-attachment nodes
  double drop = 0.0;     // m
  double load = 0.0;     // N, vertical force the plate pushes down with
  double tangent = 0.0;  // N/m, d load / d drop
};

/// Plate-driven solver around a prestressed configuration. Ground nodes are
/// pinned at the terrain heights; the plate moves vertically only.
class PlateModel {
 public:
  PlateModel(Configuration prestressed, Terrain terrain = {}, SolverOptions options = {});

  /// Equilibrium at a prescribed plate drop; warm-started from the last
  /// converged state.
  PlateState at_drop(double drop);
  /// Equilibrium whose plate load equals `load` (Newton on the drop with a
  /// bisection safeguard).
  PlateState at_load(double load);

  const Configuration& prestressed() const { return prestressed_; }

 private:
  Configuration prestressed_;
  Terrain terrain_;
  SolverOptions options_;
  std::vector<std::size_t> fixed_;
  std::vector<std::size_t> top_;
  Coordinates current_;
  Coordinates base_;  // prescribed positions at drop 0
  std::optional<PlateState> last_;
};

/// Incremental axial loading of the top on flat terrain.
/// Errors from a step are rethrown with the step index in the message.
Profile axial_load_profile(const Configuration& config, double max_load = 1100.0, int steps = 22,
                           const SolverOptions& options = {});

struct RigidModel {
  double stiffness = 1.0e7;  // N/m
};

struct SpringModel {
  double stiffness = 10800.0;   // N/m
  double travel = 0.035;        // m
  double bottom_stiffness = 2.0e5;  // N/m
};

struct TensegrityModel {
  Configuration config;
};

using DeviceModel = std::variant<RigidModel, SpringModel, TensegrityModel>;

Profile comparison_device_profile(const DeviceModel& model, double max_load = 1100.0, int steps = 22,
                                  const SolverOptions& options = {});

/// Closed-form displacement of the spring crutch at `load`.
double spring_displacement(const SpringModel& model, double load);

struct TerrainResult {
  Configuration config;
  /// Force the structure exerts on the attachment at each top node, in
  /// top-node order (the signal felt through the shaft).
  std::vector<Vec3> top_reactions;
  Vec3 resultant = Vec3::Zero();
  double drop = 0.0;
};

/// Equilibrium of the plate-held column on uneven terrain. The plate carries
/// the total vertical load of `load` (downward forces are negative z).
TerrainResult terrain_conformance(const Configuration& config, const LoadCase& load, const Terrain& terrain,
                                  const SolverOptions& options = {});

struct MemberFailure {
  int member_id = 0;
  double force = 0.0;
  double limit = 0.0;
  double margin = 0.0;  // limit - |force|, <= 0 here
};

struct FailureReport {
  std::vector<MemberFailure> members;
  double top_load = 0.0;  // N, compressive load carried through the top nodes
  double module_limit = 2000.0;
  bool module_warning = false;
};

/// Members at or beyond their failure load, judged from the stored member
/// forces, plus a module flag when the top load reaches `module_limit`.
FailureReport check_member_failure(const Configuration& config, double module_limit = 2000.0);

}  // namespace crutchlab::tensegrity
