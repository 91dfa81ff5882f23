#include "crutchlab/tensegrity/topology.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

namespace crutchlab::tensegrity {

std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::TopAttachment: return "top-attachment";
    case NodeRole::Interface: return "interface";
    case NodeRole::GroundContact: return "ground-contact";
  }
  return "interface";
}

std::string_view to_string(MemberKind kind) {
  return kind == MemberKind::Cable ? "cable" : "strut";
}

NodeRole node_role_from_string(std::string_view s) {
  if (s == "top-attachment") return NodeRole::TopAttachment;
  if (s == "interface") return NodeRole::Interface;
  if (s == "ground-contact") return NodeRole::GroundContact;
  throw InvalidInput("unknown node role '" + std::string(s) + "'");
}

MemberKind member_kind_from_string(std::string_view s) {
  if (s == "cable") return MemberKind::Cable;
  if (s == "strut") return MemberKind::Strut;
  throw InvalidInput("unknown member kind '" + std::string(s) + "'");
}

namespace {

// Union-find over node indices, for the cable connectivity check.
struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

}  // namespace

Topology::Topology(std::vector<Node> nodes, std::vector<Member> members)
    : nodes_(std::move(nodes)), members_(std::move(members)) {
  if (nodes_.empty()) throw InvalidInput("topology has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].position.allFinite())
      throw InvalidInput("node " + std::to_string(nodes_[i].id) + " has a non-finite position");
    if (!node_lookup_.emplace(nodes_[i].id, i).second)
      throw InvalidInput("duplicate node id " + std::to_string(nodes_[i].id));
  }

  std::vector<int> touched(nodes_.size(), 0);
  std::vector<int> strut_ends(nodes_.size(), 0);
  DisjointSets cables(nodes_.size());
  end_index_.reserve(members_.size());
  for (std::size_t j = 0; j < members_.size(); ++j) {
    const Member& m = members_[j];
    const std::string tag = "member " + std::to_string(m.id);
    if (!member_lookup_.emplace(m.id, j).second) throw InvalidInput("duplicate " + tag);
    if (m.node_a == m.node_b) throw InvalidInput(tag + " has coincident ends");
    if (!(m.axial_rigidity > 0.0)) throw InvalidInput(tag + " needs axial_rigidity > 0");
    if (!(m.rest_length > 0.0)) throw InvalidInput(tag + " needs rest_length > 0");
    if (!(m.failure_load > 0.0)) throw InvalidInput(tag + " needs failure_load > 0");
    if (m.kind == MemberKind::Cable && m.rest_length_offset != 0.0)
      throw InvalidInput(tag + " is a cable with a rest_length_offset");
    const std::size_t a = node_index(m.node_a);
    const std::size_t b = node_index(m.node_b);
    end_index_.emplace_back(a, b);
    ++touched[a];
    ++touched[b];
    if (m.kind == MemberKind::Strut) {
      if (++strut_ends[a] > 1 || ++strut_ends[b] > 1)
        throw InvalidInput(tag + " shares a node with another strut (not class-1)");
    } else {
      cables.unite(a, b);
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (touched[i] == 0) throw InvalidInput("node " + std::to_string(nodes_[i].id) + " has no members");
    if (cables.find(i) != cables.find(0)) throw InvalidInput("cable graph is not connected");
  }
}

std::size_t Topology::node_index(int id) const {
  auto it = node_lookup_.find(id);
  if (it == node_lookup_.end()) throw InvalidInput("unknown node id " + std::to_string(id));
  return it->second;
}

std::size_t Topology::member_index(int id) const {
  auto it = member_lookup_.find(id);
  if (it == member_lookup_.end()) throw InvalidInput("unknown member id " + std::to_string(id));
  return it->second;
}

std::vector<std::size_t> Topology::nodes_with_role(NodeRole role) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].role == role) out.push_back(i);
  return out;
}

std::size_t Topology::count(MemberKind kind) const {
  std::size_t n = 0;
  for (const auto& m : members_) n += (m.kind == kind);
  return n;
}

Coordinates Topology::reference_coordinates() const {
  Coordinates x(3, static_cast<Eigen::Index>(nodes_.size()));
  for (std::size_t i = 0; i < nodes_.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = nodes_[i].position;
  return x;
}

Topology Topology::with_strut_extension(double extension) const {
  if (!(extension >= 0.0) || !std::isfinite(extension)) throw InvalidInput("strut extension must be >= 0");
  auto members = members_;
  for (auto& m : members)
    if (m.kind == MemberKind::Strut) m.rest_length_offset = extension;
  return Topology(nodes_, std::move(members));
}

Topology Topology::with_cable_axial_rigidity(double ea) const {
  if (!(ea > 0.0)) throw InvalidInput("cable axial rigidity must be > 0");
  auto members = members_;
  for (auto& m : members)
    if (m.kind == MemberKind::Cable) m.axial_rigidity = ea;
  return Topology(nodes_, std::move(members));
}

namespace {

Vec3 on_ring(double radius, double angle, double z) {
  return {radius * std::cos(angle), radius * std::sin(angle), z};
}

class Builder {
 public:
  explicit Builder(const MaterialDefaults& mat) : mat_(mat) {}

  int node(const Vec3& p, NodeRole role) {
    const int id = static_cast<int>(nodes_.size());
    for (const auto& n : nodes_)
      if ((n.position - p).norm() < 1e-12)
        throw DegenerateGeometry("coincident nodes at generated position");
    nodes_.push_back({id, p, role});
    return id;
  }

  void member(MemberKind kind, int a, int b) {
    const double length = (nodes_[a].position - nodes_[b].position).norm();
    if (length < 1e-12) throw DegenerateGeometry("zero-length member");
    Member m;
    m.id = static_cast<int>(members_.size());
    m.kind = kind;
    m.node_a = a;
    m.node_b = b;
    m.rest_length = length;
    if (kind == MemberKind::Cable) {
      m.axial_rigidity = mat_.cable_axial_rigidity;
      m.failure_load = mat_.cable_failure_load;
    } else {
      m.axial_rigidity = mat_.strut_axial_rigidity;
      m.failure_load = mat_.strut_failure_load;
    }
    members_.push_back(m);
  }

  // Standard n-prism: strut b_i -> t_{i+1}, diagonal cable b_i -> t_i.
  void prism(const std::vector<int>& bottom, const std::vector<int>& top) {
    const std::size_t n = bottom.size();
    for (std::size_t i = 0; i < n; ++i) member(MemberKind::Strut, bottom[i], top[(i + 1) % n]);
    for (std::size_t i = 0; i < n; ++i) member(MemberKind::Cable, bottom[i], bottom[(i + 1) % n]);
    for (std::size_t i = 0; i < n; ++i) member(MemberKind::Cable, top[i], top[(i + 1) % n]);
    for (std::size_t i = 0; i < n; ++i) member(MemberKind::Cable, bottom[i], top[i]);
  }

  Topology finish() { return Topology(std::move(nodes_), std::move(members_)); }

 private:
  MaterialDefaults mat_;
  std::vector<Node> nodes_;
  std::vector<Member> members_;
};

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string(what) + " must be > 0");
}

}  // namespace

Topology build_two_cell_column(const ColumnGeometry& g, const MaterialDefaults& materials) {
  check_positive(g.radius, "radius");
  check_positive(g.cell_height, "cell_height");
  check_positive(g.saddle_gap, "saddle_gap");
  if (!(g.twist > 0.0 && g.twist < std::numbers::pi / 2.0)) throw InvalidInput("twist must lie in (0, pi/2)");
  if (!(g.saddle_gap < g.radius)) throw DegenerateGeometry("saddle_gap must be smaller than radius");

  constexpr double quarter = std::numbers::pi / 2.0;
  constexpr double eighth = std::numbers::pi / 4.0;
  const double r = g.radius;
  const double h = g.cell_height;
  const double inner = r - g.saddle_gap;

  Builder b(materials);
  std::vector<int> ground, lower_top, upper_bottom, top;
  for (int i = 0; i < 4; ++i) ground.push_back(b.node(on_ring(r, i * quarter, 0.0), NodeRole::GroundContact));
  for (int i = 0; i < 4; ++i)
    lower_top.push_back(b.node(on_ring(r, i * quarter + g.twist, h), NodeRole::Interface));
  for (int i = 0; i < 4; ++i)
    upper_bottom.push_back(b.node(on_ring(inner, i * quarter + g.twist + eighth, h), NodeRole::Interface));
  for (int i = 0; i < 4; ++i)
    top.push_back(b.node(on_ring(r, i * quarter + 2.0 * g.twist + eighth, 2.0 * h), NodeRole::TopAttachment));

  b.prism(ground, lower_top);
  b.prism(upper_bottom, top);
  // Saddle: each upper-bottom node sits angularly between two lower-top nodes.
  for (int j = 0; j < 4; ++j) {
    b.member(MemberKind::Cable, upper_bottom[j], lower_top[j]);
    b.member(MemberKind::Cable, upper_bottom[j], lower_top[(j + 1) % 4]);
  }
  return b.finish();
}

Topology build_prism(int struts, double radius, double height, double twist, const MaterialDefaults& materials) {
  if (struts < 3) throw InvalidInput("a prism needs at least 3 struts");
  check_positive(radius, "radius");
  check_positive(height, "height");
  const double step = 2.0 * std::numbers::pi / struts;
  Builder b(materials);
  std::vector<int> bottom, top;
  for (int i = 0; i < struts; ++i) bottom.push_back(b.node(on_ring(radius, i * step, 0.0), NodeRole::GroundContact));
  for (int i = 0; i < struts; ++i)
    top.push_back(b.node(on_ring(radius, i * step + twist, height), NodeRole::TopAttachment));
  b.prism(bottom, top);
  return b.finish();
}

}  // namespace crutchlab::tensegrity
