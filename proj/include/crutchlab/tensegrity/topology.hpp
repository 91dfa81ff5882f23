#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crutchlab/error.hpp"

namespace crutchlab::tensegrity {

using Vec3 = Eigen::Vector3d;
/// Node coordinates, one column per node in topology order.
using Coordinates = Eigen::Matrix3Xd;

enum class NodeRole { TopAttachment, Interface, GroundContact };
enum class MemberKind { Cable, Strut };

std::string_view to_string(NodeRole role);
std::string_view to_string(MemberKind kind);
NodeRole node_role_from_string(std::string_view s);
MemberKind member_kind_from_string(std::string_view s);

struct Node {
  int id = 0;
  Vec3 position = Vec3::Zero();
  NodeRole role = NodeRole::Interface;
};

struct Member {
  int id = 0;
  MemberKind kind = MemberKind::Cable;
  int node_a = 0;
  int node_b = 0;
  double axial_rigidity = 0.0;  // EA, N
  double rest_length = 0.0;     // m
  // Nut-turn extension of a strut's effective length; always 0 for cables.
  double rest_length_offset = 0.0;
  double failure_load = 1500.0;  // N

  double effective_rest_length() const { return rest_length + rest_length_offset; }
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// Nodes and members of a tensegrity. Construction validates the class-1
/// invariant, cable-graph connectivity and member data.
class Topology {
 public:
  Topology(std::vector<Node> nodes, std::vector<Member> members);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Member>& members() const { return members_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t member_count() const { return members_.size(); }

  /// Position of a node id in nodes(); throws InvalidInput for unknown ids.
  std::size_t node_index(int id) const;
  std::size_t member_index(int id) const;
  std::size_t end_a(std::size_t member) const { return end_index_[member].first; }
  std::size_t end_b(std::size_t member) const { return end_index_[member].second; }

  std::vector<std::size_t> nodes_with_role(NodeRole role) const;
  std::size_t count(MemberKind kind) const;

  /// Reference coordinates (the positions stored on the nodes).
  Coordinates reference_coordinates() const;

  /// Copy with every strut's rest_length_offset set to `extension`.
  Topology with_strut_extension(double extension) const;
  /// Copy with every cable's axial rigidity replaced.
  Topology with_cable_axial_rigidity(double ea) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Member> members_;
  std::unordered_map<int, std::size_t> node_lookup_;
  std::unordered_map<int, std::size_t> member_lookup_;
  std::vector<std::pair<std::size_t, std::size_t>> end_index_;
};

struct MaterialDefaults {
  double cable_axial_rigidity = 2.0e5;  // N
  double strut_axial_rigidity = 2.0e6;  // N
  double cable_failure_load = 1500.0;   // N
  double strut_failure_load = 2000.0;   // N
};

struct ColumnGeometry {
  double radius = 0.05;        // m
  double cell_height = 0.10;   // m
  double twist = std::numbers::pi / 4.0;
  // Radial inset of the upper cell's interface ring. The two interface rings
  // are coplanar and rotated by pi/4 so each upper node sits between two
  // lower nodes.
  double saddle_gap = 0.02;    // m
};

/// Two stacked four-strut prisms joined by eight saddle cables.
///
/// Node layout (ids equal indices): 0-3 ground-contact ring, 4-7 lower cell
/// top ring, 8-11 upper cell bottom ring, 12-15 top-attachment ring.
/// Members: per cell 4 struts, 4 bottom, 4 top and 4 diagonal cables, then
/// 8 saddle cables, for 8 struts and 32 cables in total.
Topology build_two_cell_column(const ColumnGeometry& geometry = {},
                               const MaterialDefaults& materials = {});

/// A single n-strut twisted prism of the same family (used for checks of the
/// prism equilibrium twist pi/2 - pi/n). Bottom ring nodes are ground-contact,
/// top ring nodes top-attachment.
Topology build_prism(int struts, double radius, double height, double twist,
                     const MaterialDefaults& materials = {});

}  // namespace crutchlab::tensegrity
