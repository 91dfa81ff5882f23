#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "crutchlab/tensegrity/calibration.hpp"
#include "crutchlab/tensegrity/serialize.hpp"
#include "crutchlab/tensegrity/statics.hpp"
#include "oracles.hpp"

using namespace crutchlab;
using namespace crutchlab::tensegrity;
using Eigen::Index;

namespace {

// Rank from the eigenvalues of A^T A; independent of the SVD used in the library.
Index numerical_nullity(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.transpose() * a, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  Index n = 0;
  for (Index i = 0; i < ev.size(); ++i) n += ev(i) < 1e-16 * top;
  return n;
}

using oracle::fd_tangent;

double min_cable(const Configuration& c) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c.topology.member_count(); ++j)
    if (c.topology.members()[j].kind == MemberKind::Cable) m = std::min(m, c.member_forces(static_cast<Index>(j)));
  return m;
}

double max_strut(const Configuration& c) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c.topology.member_count(); ++j)
    if (c.topology.members()[j].kind == MemberKind::Strut) m = std::max(m, c.member_forces(static_cast<Index>(j)));
  return m;
}

Topology two_node(MemberKind kind, double ea, double length, bool parallel_cable = false) {
  std::vector<Node> nodes{{0, Vec3::Zero(), NodeRole::GroundContact}, {1, Vec3(length, 0, 0), NodeRole::TopAttachment}};
  std::vector<Member> members;
  Member m;
  m.id = 0;
  m.kind = kind;
  m.node_a = 0;
  m.node_b = 1;
  m.axial_rigidity = ea;
  m.rest_length = length;
  members.push_back(m);
  if (parallel_cable) {
    m.id = 1;
    m.kind = MemberKind::Cable;
    m.axial_rigidity = ea / 10.0;
    members.push_back(m);
  }
  return Topology(nodes, members);
}

const Configuration& calibrated() {
  static const Configuration c = calibrated_configuration();
  return c;
}

}  // namespace

TEST_CASE("default column has 16 nodes, 8 struts, 32 cables") {
  const Topology t = build_two_cell_column();
  CHECK(t.node_count() == 16);
  CHECK(t.count(MemberKind::Strut) == 8);
  CHECK(t.count(MemberKind::Cable) == 32);
  CHECK(t.nodes_with_role(NodeRole::GroundContact) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(t.nodes_with_role(NodeRole::TopAttachment) == std::vector<std::size_t>{12, 13, 14, 15});

  // Class-1 and degree count by direct enumeration.
  std::vector<int> strut_ends(16, 0), degree(16, 0);
  for (const auto& m : t.members()) {
    ++degree[m.node_a];
    ++degree[m.node_b];
    if (m.kind == MemberKind::Strut) {
      ++strut_ends[m.node_a];
      ++strut_ends[m.node_b];
    }
  }
  for (int i = 0; i < 16; ++i) {
    CHECK(strut_ends[i] == 1);
    // ground/top rings: strut + 2 ring + 1 diagonal; interface nodes add 2 saddles
    CHECK(degree[i] == ((i >= 4 && i < 12) ? 6 : 4));
  }
}

TEST_CASE("column builder rejects bad input") {
  ColumnGeometry g;
  g.radius = 0.0;
  CHECK_THROWS_AS(build_two_cell_column(g), InvalidInput);
  g = {};
  g.twist = 0.0;
  CHECK_THROWS_AS(build_two_cell_column(g), InvalidInput);
  g = {};
  g.saddle_gap = g.radius;
  CHECK_THROWS_AS(build_two_cell_column(g), DegenerateGeometry);
}

TEST_CASE("topology invariants are enforced") {
  std::vector<Node> nodes{{0, Vec3(0, 0, 0), NodeRole::GroundContact},
                          {1, Vec3(1, 0, 0), NodeRole::Interface},
                          {2, Vec3(0, 1, 0), NodeRole::TopAttachment}};
  Member s0{0, MemberKind::Strut, 0, 1, 1.0, 1.0};
  Member s1{1, MemberKind::Strut, 1, 2, 1.0, 1.0};
  Member c0{2, MemberKind::Cable, 0, 2, 1.0, 1.0};
  Member c1{3, MemberKind::Cable, 0, 1, 1.0, 1.0};
  CHECK_THROWS_AS(Topology(nodes, {s0, s1, c0}), InvalidInput);  // struts share node 1
  CHECK_THROWS_AS(Topology(nodes, {s0, c1}), InvalidInput);      // node 2 untouched
  Member bad = c0;
  bad.axial_rigidity = 0.0;
  CHECK_THROWS_AS(Topology(nodes, {s0, bad, c1}), InvalidInput);
  Member offset = c0;
  offset.rest_length_offset = 0.01;
  CHECK_THROWS_AS(Topology(nodes, {s0, offset, c1}), InvalidInput);
  CHECK_NOTHROW(Topology(nodes, {s0, c0, c1}));
}

TEST_CASE("equilibrium matrix of a single member") {
  const Topology t = two_node(MemberKind::Cable, 1.0, 1.0);
  const Eigen::MatrixXd a = equilibrium_matrix(t, t.reference_coordinates());
  REQUIRE(a.rows() == 6);
  REQUIRE(a.cols() == 1);
  Eigen::VectorXd expect(6);
  expect << 1, 0, 0, -1, 0, 0;
  CHECK((a.col(0) + expect).norm() == 0.0);  // node 0 block is x0 - x1 = -(1,0,0)
  Coordinates z = t.reference_coordinates();
  z.col(1) = z.col(0);
  CHECK_THROWS_AS(equilibrium_matrix(t, z), DegenerateGeometry);
}

TEST_CASE("prism self-stress at the equilibrium twist") {
  const Topology p3 = build_prism(3, 0.05, 0.1, std::numbers::pi / 2 - std::numbers::pi / 3);
  const Eigen::MatrixXd a3 = equilibrium_matrix(p3, p3.reference_coordinates());
  CHECK(a3.rows() == 18);
  CHECK(a3.cols() == 12);
  CHECK(numerical_nullity(a3) == 1);
  const SelfStress s3 = find_self_stress(p3, p3.reference_coordinates());
  CHECK(s3.null_space_dimension == 1);

  const Topology p4 = build_prism(4, 0.05, 0.1, std::numbers::pi / 4);
  const SelfStress s4 = find_self_stress(p4, p4.reference_coordinates());
  CHECK(s4.null_space_dimension == 1);
  CHECK(numerical_nullity(equilibrium_matrix(p4, p4.reference_coordinates())) == 1);
  CHECK(s4.force_densities.cwiseAbs().maxCoeff() == doctest::Approx(1.0));

  const Topology off = build_prism(4, 0.05, 0.1, 0.1);
  bool rejected = false;
  try {
    find_self_stress(off, off.reference_coordinates());
  } catch (const NoSelfStress&) {
    rejected = true;
  } catch (const SignInfeasible&) {
    rejected = true;
  }
  CHECK(rejected);
}

TEST_CASE("self-stress residual and sign pattern") {
  for (const Topology& t : {build_prism(3, 0.05, 0.1, std::numbers::pi / 6), build_prism(4, 0.05, 0.1, std::numbers::pi / 4),
                            build_prism(6, 0.07, 0.2, std::numbers::pi / 2 - std::numbers::pi / 6), build_two_cell_column()}) {
    const Coordinates x = t.reference_coordinates();
    const SelfStress s = find_self_stress(t, x);
    const Eigen::VectorXd q = s.force_densities;
    const double scale = member_lengths(t, x).maxCoeff();
    CHECK((equilibrium_matrix(t, x) * q).lpNorm<Eigen::Infinity>() < 1e-8 * q.cwiseAbs().maxCoeff() * scale);
    for (std::size_t j = 0; j < t.member_count(); ++j) {
      if (t.members()[j].kind == MemberKind::Cable)
        CHECK(q(static_cast<Index>(j)) > 0.0);
      else
        CHECK(q(static_cast<Index>(j)) < 0.0);
    }
  }
}

TEST_CASE("self-stress direction is invariant to scaling the geometry") {
  const Topology t = build_two_cell_column();
  const Coordinates x = t.reference_coordinates();
  const Eigen::VectorXd q1 = find_self_stress(t, x).force_densities;
  for (double s : {0.1, 3.0, 17.0}) {
    const Eigen::VectorXd q2 = find_self_stress(t, s * x).force_densities;
    CHECK(q1.dot(q2) / (q1.norm() * q2.norm()) > 1.0 - 1e-10);
  }
}

TEST_CASE("apply_prestress") {
  const Topology t = build_two_cell_column();
  SUBCASE("zero extension is the reference state") {
    const Configuration c = apply_prestress(t, 0.0);
    CHECK(c.member_forces.cwiseAbs().maxCoeff() == 0.0);
    CHECK((c.coords - t.reference_coordinates()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("2 mm extension: every cable in tension, every strut compressed") {
    const Configuration c = apply_prestress(t, 0.002);
    CHECK(c.residual < 1e-6);
    CHECK(min_cable(c) > 0.0);
    CHECK(max_strut(c) < 0.0);
    for (const auto& m : c.topology.members())
      if (m.kind == MemberKind::Strut) CHECK(m.rest_length_offset == 0.002);
  }
  SUBCASE("doubling the extension raises every force magnitude") {
    const Configuration a = apply_prestress(t, 0.001);
    const Configuration b = apply_prestress(t, 0.002);
    for (Index j = 0; j < a.member_forces.size(); ++j)
      CHECK(std::abs(b.member_forces(j)) > std::abs(a.member_forces(j)));
  }
  CHECK_THROWS_AS(apply_prestress(t, -1e-3), InvalidInput);
}

TEST_CASE("tangent stiffness of a single cable") {
  const double ea = 1000.0, l0 = 1.0, l = 1.01;
  Topology t = two_node(MemberKind::Cable, ea, l0);
  Coordinates x = t.reference_coordinates();
  x.col(1) = Vec3(l, 0, 0);
  const Eigen::MatrixXd k = tangent_stiffness(t, x);
  const double tension = ea * (l - l0) / l0;
  Eigen::Matrix3d kk = Eigen::Matrix3d::Zero();
  kk(0, 0) = ea / l0;
  kk(1, 1) = kk(2, 2) = tension / l;
  CHECK((k.block<3, 3>(0, 0) - kk).norm() < 1e-12);
  CHECK((k.block<3, 3>(0, 3) + kk).norm() < 1e-12);
  CHECK((k.block<3, 3>(3, 3) - kk).norm() < 1e-12);

  x.col(1) = Vec3(0.99, 0, 0);  // slack
  CHECK(tangent_stiffness(t, x).norm() == 0.0);
  CHECK(member_forces(t, x)(0) == 0.0);
}

TEST_CASE("tangent stiffness matches finite differences on random prestressed states") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> ext(0.0005, 0.02);
  std::uniform_real_distribution<double> ea(2e3, 2e5);
  std::normal_distribution<double> jitter(0.0, 1e-6);
  const Topology base = build_two_cell_column();
  for (int trial = 0; trial < 20; ++trial) {
    const Configuration c = apply_prestress(base.with_cable_axial_rigidity(ea(rng)), ext(rng));
    Coordinates x = c.coords;
    for (Index i = 0; i < x.size(); ++i) x.data()[i] += jitter(rng);
    REQUIRE(min_cable(Configuration{c.topology, x, member_forces(c.topology, x), {}, {}, {}, false, 0, 0.0}) > 0.0);
    const Eigen::MatrixXd k = tangent_stiffness(c.topology, x);
    const Eigen::MatrixXd kfd = fd_tangent(c.topology, x, 1e-7);
    const double scale = k.cwiseAbs().maxCoeff();
    CHECK((k - kfd).cwiseAbs().maxCoeff() / scale < 1e-4);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale);
  }
}

TEST_CASE("single bar matches the closed form F L / EA") {
  const double ea = 2.0e5, length = 0.3, force = 120.0;
  SUBCASE("cable in tension") {
    const Topology t = two_node(MemberKind::Cable, ea, length);
    const Configuration c = apply_prestress(t, 0.0);
    LoadCase lc;
    lc.forces[1] = Vec3(force, 0, 0);
    const Configuration s = solve_static(c, lc, {});
    CHECK(s.coords(0, 1) - length == doctest::Approx(force * length / ea).epsilon(1e-9));
  }
  SUBCASE("strut in compression with a slack parallel cable") {
    const Topology t = two_node(MemberKind::Strut, ea, length, true);
    const Configuration c = apply_prestress(t, 0.0);
    LoadCase lc;
    lc.forces[1] = Vec3(-force, 0, 0);
    const Configuration s = solve_static(c, lc, {});
    CHECK(length - s.coords(0, 1) == doctest::Approx(force * length / ea).epsilon(1e-9));
    CHECK(s.member_forces(1) == 0.0);
  }
}

TEST_CASE("solve_static on the default column") {
  const Configuration c = apply_prestress(build_two_cell_column(), 0.002);
  SUBCASE("zero load on flat ground is a fixed point") {
    const Configuration s = solve_static(c, {}, {});
    CHECK(s.iterations == 0);
    CHECK((s.coords - c.coords).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("-500 N over the top nodes") {
    const LoadCase lc = LoadCase::uniform_vertical(c.topology, NodeRole::TopAttachment, -500.0);
    const Configuration s = solve_static(c, lc, {});
    CHECK(s.residual < 1e-6);
    CHECK(min_cable(s) >= -1e-9);
    CHECK(max_strut(s) <= 1e-9);
    const Vec3 balance = s.reactions.rowwise().sum() + s.loads.rowwise().sum();
    CHECK(balance.lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK(constrained_min_eigenvalue(s) > 0.0);
  }
  SUBCASE("loads on supports are rejected") {
    LoadCase lc;
    lc.forces[0] = Vec3(0, 0, -1);
    CHECK_THROWS_AS(solve_static(c, lc, {}), InvalidInput);
  }
  SUBCASE("terrain must leave a node at height 0") {
    Terrain tr;
    for (int i = 0; i < 4; ++i) tr.offsets[i] = 0.001;
    CHECK_THROWS_AS(solve_static(c, {}, tr), InvalidInput);
  }
}

TEST_CASE("unprestressed column under load is a mechanism") {
  const Configuration c = apply_prestress(build_two_cell_column(), 0.0);
  const LoadCase lc = LoadCase::uniform_vertical(c.topology, NodeRole::TopAttachment, -100.0);
  SolverOptions opt;
  opt.dynamic_relaxation_fallback = false;
  CHECK_THROWS_AS(solve_static(c, lc, {}, opt), MechanismSingularity);
}

TEST_CASE("calibrated defaults reproduce the stiffness anchors") {
  const Profile p = axial_load_profile(calibrated(), 1100.0, 22);
  REQUIRE(p.size() == 23);
  CHECK(p[0].displacement == 0.0);
  CHECK(p[0].secant == p[0].tangent);
  CHECK(p[0].tangent == doctest::Approx(16300.0).epsilon(0.3));
  CHECK(p[20].load == doctest::Approx(1000.0));
  CHECK(p[20].tangent >= 5.0 * p[0].tangent);
  CHECK(p[20].tangent > p[1].tangent);  // 1000 N vs 50 N
  for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i].displacement >= p[i - 1].displacement);
}

TEST_CASE("plate-held column stays stable and cables stay taut up to 1100 N") {
  PlateModel model(calibrated());
  for (double f : {100.0, 500.0, 1100.0}) {
    const PlateState s = model.at_load(f);
    CHECK(s.load == doctest::Approx(f).epsilon(1e-9));
    CHECK(constrained_min_eigenvalue(s.config) > 0.0);
    CHECK(min_cable(s.config) > 0.0);
    // Central difference of load over drop as an oracle for the condensed tangent.
    SolverOptions tight;
    tight.tolerance = 1e-9;
    PlateModel probe(calibrated(), {}, tight);
    probe.at_load(f);
    const double h = 1e-6;
    const double kfd = (probe.at_drop(s.drop + h).load - probe.at_drop(s.drop - h).load) / (2 * h);
    CHECK(s.tangent == doctest::Approx(kfd).epsilon(1e-4));
  }
}

TEST_CASE("recomputed calibration agrees with the shipped defaults") {
  const CalibrationResult r = calibrate(build_two_cell_column());
  CHECK(r.strut_extension == doctest::Approx(CalibratedDefaults::strut_extension).epsilon(1e-6));
  CHECK(r.cable_axial_rigidity == doctest::Approx(CalibratedDefaults::cable_axial_rigidity).epsilon(1e-6));
  CHECK(r.initial_stiffness == doctest::Approx(16300.0).epsilon(1e-6));
  CHECK(r.loaded_stiffness == doctest::Approx(121300.0).epsilon(1e-6));

  std::ifstream in(CRUTCHLAB_SOURCE_DIR "/config/column_defaults.json");
  REQUIRE(in);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["calibration"]["strut_extension_m"].get<double>() == CalibratedDefaults::strut_extension);
  CHECK(j["calibration"]["cable_axial_rigidity_N"].get<double>() == CalibratedDefaults::cable_axial_rigidity);
}

TEST_CASE("comparison device profiles") {
  const SpringModel spring{10800.0, 0.035, 200000.0};
  CHECK(spring_displacement(spring, 300.0) == doctest::Approx(300.0 / 10800.0).epsilon(1e-12));
  CHECK(std::abs(spring_displacement(spring, 378.0) - 0.035) < 1e-9);
  CHECK(std::abs(spring_displacement(spring, 500.0) - (0.035 + 122.0 / 200000.0)) < 1e-9);

  const Profile p = comparison_device_profile(spring, 1000.0, 20);
  for (const auto& pt : p) {
    if (pt.load <= 378.0) {
      CHECK(pt.tangent == 10800.0);
      CHECK(std::abs(pt.displacement - pt.load / 10800.0) < 1e-9);
    } else {
      CHECK(pt.tangent == 200000.0);
    }
  }
  const Profile r = comparison_device_profile(RigidModel{}, 1000.0, 10);
  CHECK(r.back().displacement <= 1e-4);
  CHECK(r.back().displacement == doctest::Approx(1e-4));
  CHECK_THROWS_AS(comparison_device_profile(SpringModel{10800.0, 0.0, 2e5}, 1000.0, 10), InvalidInput);
  CHECK_THROWS_AS(comparison_device_profile(RigidModel{}, 1000.0, 5), InvalidInput);
}

namespace {

// Table on four splayed axial legs, plate clamped: the horizontal force the
// legs put on the plate after raising some feet by dz.
Vec3 table_oracle(const Configuration& c, const std::vector<int>& raised, double dz) {
  const auto& t = c.topology;
  const auto ground = t.nodes_with_role(NodeRole::GroundContact);
  const auto top = t.nodes_with_role(NodeRole::TopAttachment);
  Vec3 centre = Vec3::Zero();
  for (auto i : top) centre += c.coords.col(static_cast<Index>(i));
  centre /= static_cast<double>(top.size());
  Vec3 force = Vec3::Zero();
  for (auto g : ground) {
    const Vec3 foot = c.coords.col(static_cast<Index>(g));
    Vec3 head = centre + 0.5 * (Vec3(foot.x(), foot.y(), 0.0) - Vec3(centre.x(), centre.y(), 0.0));
    const Vec3 axis = (head - foot).normalized();
    const bool up = std::find(raised.begin(), raised.end(), t.nodes()[g].id) != raised.end();
    const double shortening = up ? dz * axis.z() : 0.0;
    force += shortening * axis;  // unit leg stiffness, push along the leg
  }
  return {force.x(), force.y(), 0.0};
}

}  // namespace

TEST_CASE("terrain conformance") {
  const Configuration& c = calibrated();
  const LoadCase lc = LoadCase::uniform_vertical(c.topology, NodeRole::TopAttachment, -500.0);
  SUBCASE("flat ground, symmetric load") {
    const TerrainResult r = terrain_conformance(c, lc, {});
    CHECK(std::hypot(r.resultant.x(), r.resultant.y()) < 1e-6);
    CHECK(r.resultant.z() == doctest::Approx(500.0).epsilon(1e-9));
  }
  SUBCASE("two adjacent ground nodes raised 5 mm") {
    Terrain tr;
    tr.offsets[0] = 0.005;
    tr.offsets[1] = 0.005;
    const TerrainResult r = terrain_conformance(c, lc, tr);
    CHECK(r.config.residual < 1e-6);
    CHECK(min_cable(r.config) >= -1e-9);
    const double horizontal = std::hypot(r.resultant.x(), r.resultant.y());
    CHECK(horizontal > 1.0);
    // Points away from the raised side, like a splayed four-leg table.
    const Vec3 oracle = table_oracle(c, {0, 1}, 0.005);
    const Vec3 raised = 0.5 * (c.coords.col(0) + c.coords.col(1));
    CHECK(oracle.dot(Vec3(raised.x(), raised.y(), 0.0)) < 0.0);
    CHECK(Vec3(r.resultant.x(), r.resultant.y(), 0.0).dot(oracle) > 0.0);
    CHECK(Vec3(r.resultant.x(), r.resultant.y(), 0.0).dot(Vec3(raised.x(), raised.y(), 0.0)) < 0.0);
    double vertical = 0.0;
    for (const auto& v : r.top_reactions) vertical += v.z();
    CHECK(std::abs(vertical - 500.0) < 1e-6);
    const Vec3 ground = r.config.reactions.leftCols(4).rowwise().sum();
    CHECK(std::abs(ground.z() - 500.0) < 1e-6);
    CHECK(check_member_failure(r.config).members.empty());
  }
}

TEST_CASE("member failure report") {
  const Configuration& c = calibrated();
  const FailureReport quiet = check_member_failure(c);
  CHECK(quiet.members.empty());
  CHECK_FALSE(quiet.module_warning);
  CHECK(std::abs(quiet.top_load) < 1e-5);

  Configuration forced = c;
  forced.member_forces(8) = 1600.0;  // a lower-cell top ring cable
  const FailureReport hit = check_member_failure(forced);
  REQUIRE(hit.members.size() == 1);
  CHECK(hit.members[0].member_id == 8);
  CHECK(hit.members[0].limit == 1500.0);
  CHECK(hit.members[0].margin == doctest::Approx(-100.0));

  PlateModel model(c);
  for (double f = 500.0; f <= 2500.0; f += 500.0) model.at_load(f);
  const FailureReport heavy = check_member_failure(model.at_load(2500.0).config);
  CHECK(heavy.top_load == doctest::Approx(2500.0).epsilon(1e-9));
  CHECK(heavy.module_warning);
}

TEST_CASE("JSON round trip") {
  const Configuration& c = calibrated();
  const auto j = to_json(c);
  const Configuration back = configuration_from_json(nlohmann::json::parse(j.dump()));
  CHECK((back.coords - c.coords).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.member_forces - c.member_forces).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.supports == c.supports);
  CHECK(back.topology.members()[0].rest_length_offset == CalibratedDefaults::strut_extension);
  CHECK_THROWS_AS(topology_from_json(nlohmann::json::parse(R"({"nodes": 3})")), InvalidInput);
}
