#include "crutchlab/tensegrity/serialize.hpp"

namespace crutchlab::tensegrity {

using nlohmann::json;

namespace {

json columns(const Coordinates& c) {
  json out = json::array();
  for (Eigen::Index i = 0; i < c.cols(); ++i) out.push_back({c(0, i), c(1, i), c(2, i)});
  return out;
}

Coordinates read_columns(const json& j, std::size_t expected, const char* what) {
  if (!j.is_array() || j.size() != expected)
    throw InvalidInput(std::string(what) + " must list one 3-vector per node");
  Coordinates c(3, static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) {
    const auto& v = j.at(i);
    if (!v.is_array() || v.size() != 3) throw InvalidInput(std::string(what) + " entries must be 3-vectors");
    for (int k = 0; k < 3; ++k) c(k, static_cast<Eigen::Index>(i)) = v.at(k).get<double>();
  }
  return c;
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

json to_json(const Topology& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes())
    nodes.push_back({{"id", n.id}, {"role", to_string(n.role)}, {"position", {n.position.x(), n.position.y(), n.position.z()}}});
  json members = json::array();
  for (const auto& m : t.members())
    members.push_back({{"id", m.id},
                       {"kind", to_string(m.kind)},
                       {"ends", {m.node_a, m.node_b}},
                       {"axial_rigidity_N", m.axial_rigidity},
                       {"rest_length_m", m.rest_length},
                       {"rest_length_offset_m", m.rest_length_offset},
                       {"failure_load_N", m.failure_load}});
  return {{"nodes", nodes}, {"members", members}};
}

json to_json(const Configuration& c) {
  return {{"topology", to_json(c.topology)},
          {"coordinates_m", columns(c.coords)},
          {"member_forces_N", std::vector<double>(c.member_forces.data(), c.member_forces.data() + c.member_forces.size())},
          {"supports", c.supports},
          {"loads_N", columns(c.loads)},
          {"reactions_N", columns(c.reactions)},
          {"failure_warning", c.failure_warning},
          {"residual_N", c.residual}};
}

Topology topology_from_json(const json& j) {
  return guarded([&] {
    std::vector<Node> nodes;
    for (const auto& n : j.at("nodes")) {
      const auto& p = n.at("position");
      if (!p.is_array() || p.size() != 3) throw InvalidInput("node position must be a 3-vector");
      nodes.push_back({n.at("id").get<int>(), Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>()),
                       node_role_from_string(n.at("role").get<std::string>())});
    }
    std::vector<Member> members;
    for (const auto& m : j.at("members")) {
      const auto& ends = m.at("ends");
      if (!ends.is_array() || ends.size() != 2) throw InvalidInput("member ends must be a pair of node ids");
      Member mem;
      mem.id = m.at("id").get<int>();
      mem.kind = member_kind_from_string(m.at("kind").get<std::string>());
      mem.node_a = ends[0].get<int>();
      mem.node_b = ends[1].get<int>();
      mem.axial_rigidity = m.at("axial_rigidity_N").get<double>();
      mem.rest_length = m.at("rest_length_m").get<double>();
      mem.rest_length_offset = m.value("rest_length_offset_m", 0.0);
      mem.failure_load = m.value("failure_load_N", mem.kind == MemberKind::Cable ? 1500.0 : 2000.0);
      members.push_back(mem);
    }
    return Topology(std::move(nodes), std::move(members));
  });
}

Configuration configuration_from_json(const json& j) {
  return guarded([&] {
    Topology t = topology_from_json(j.at("topology"));
    const std::size_t n = t.node_count();
    Configuration c{t, read_columns(j.at("coordinates_m"), n, "coordinates_m"), {}, {}, {}, {}, false, 0, 0.0};
    c.supports = j.value("supports", std::vector<int>{});
    for (int id : c.supports) t.node_index(id);
    c.loads = j.contains("loads_N") ? read_columns(j.at("loads_N"), n, "loads_N")
                                    : Coordinates::Zero(3, static_cast<Eigen::Index>(n));
    refresh_state(c);
    return c;
  });
}

}  // namespace crutchlab::tensegrity
