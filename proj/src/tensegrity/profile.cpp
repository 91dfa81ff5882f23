#include "crutchlab/tensegrity/profile.hpp"

#include <Eigen/QR>

#include <cmath>
#include <sstream>

namespace crutchlab::tensegrity {

namespace {

using Index = Eigen::Index;
Index idx(std::size_t i) { return static_cast<Index>(i); }

// d(plate load)/d(drop): move every top node down by a unit with the ground
// fixed, condense out the free DOFs and sum the vertical plate reaction.
double plate_tangent(const Configuration& c, const std::vector<bool>& pinned, const std::vector<std::size_t>& top) {
  const Eigen::MatrixXd k = tangent_stiffness(c);
  const auto n = k.rows();
  std::vector<Index> free;
  for (std::size_t i = 0; i < pinned.size(); ++i)
    if (!pinned[i])
      for (Index a = 0; a < 3; ++a) free.push_back(3 * idx(i) + a);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  for (auto i : top) d(3 * idx(i) + 2) = -1.0;
  if (!free.empty()) {
    const auto nf = static_cast<Index>(free.size());
    Eigen::MatrixXd kff(nf, nf);
    Eigen::VectorXd rhs(nf);
    const Eigen::VectorXd kd = k * d;
    for (Index r = 0; r < nf; ++r) {
      rhs(r) = -kd(free[r]);
      for (Index s = 0; s < nf; ++s) kff(r, s) = k(free[r], free[s]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(kff);
    if (qr.rank() < nf) throw MechanismSingularity("plate-held column has a mechanism");
    const Eigen::VectorXd df = qr.solve(rhs);
    for (Index r = 0; r < nf; ++r) d(free[r]) = df(r);
  }
  const Eigen::VectorXd f = k * d;
  double kt = 0.0;
  for (auto i : top) kt -= f(3 * idx(i) + 2);
  return kt;
}

std::string step_context(int step, const std::string& what) {
  std::ostringstream os;
  os << "profile step " << step << ": " << what;
  return os.str();
}

void check_profile_args(double max_load, int steps) {
  if (!(max_load > 0.0) || !std::isfinite(max_load)) throw InvalidInput("max_load must be > 0");
  if (steps < 10) throw InvalidInput("profile needs at least 10 steps");
}

}  // namespace

PlateModel::PlateModel(Configuration prestressed, Terrain terrain, SolverOptions options)
    : prestressed_(std::move(prestressed)), terrain_(std::move(terrain)), options_(options) {
  const Topology& t = prestressed_.topology;
  terrain_.validate(t);
  top_ = t.nodes_with_role(NodeRole::TopAttachment);
  const auto ground = t.nodes_with_role(NodeRole::GroundContact);
  if (top_.empty() || ground.empty()) throw InvalidInput("plate model needs top-attachment and ground-contact nodes");
  fixed_ = ground;
  fixed_.insert(fixed_.end(), top_.begin(), top_.end());
  current_ = prestressed_.coords;
  base_ = prestressed_.coords;
  for (auto i : ground) {
    const auto it = terrain_.offsets.find(t.nodes()[i].id);
    base_(2, idx(i)) = it == terrain_.offsets.end() ? 0.0 : it->second;
  }
}

PlateState PlateModel::at_drop(double drop) {
  if (!std::isfinite(drop)) throw InvalidInput("plate drop must be finite");
  const Topology& t = prestressed_.topology;
  Coordinates target = base_;
  for (auto i : top_) target(2, idx(i)) -= drop;
  const Coordinates zero = Coordinates::Zero(3, idx(t.node_count()));
  const auto r = solve_with_continuation(t, current_, fixed_, target, zero, zero, options_);
  current_ = r.coords;

  PlateState s{prestressed_, drop, 0.0, 0.0};
  s.config.coords = r.coords;
  s.config.loads = zero;
  s.config.supports.clear();
  for (auto i : fixed_) s.config.supports.push_back(t.nodes()[i].id);
  refresh_state(s.config);
  s.config.iterations = r.iterations;
  for (auto i : top_) s.load -= s.config.reactions(2, idx(i));
  std::vector<bool> pinned(t.node_count(), false);
  for (auto i : fixed_) pinned[i] = true;
  s.tangent = plate_tangent(s.config, pinned, top_);
  last_ = s;
  return s;
}

PlateState PlateModel::at_load(double load) {
  if (!std::isfinite(load)) throw InvalidInput("plate load must be finite");
  const double tol = 1e-7 + 1e-10 * std::abs(load);
  PlateState s = last_ ? *last_ : at_drop(0.0);
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    const double gap = load - s.load;
    if (std::abs(gap) <= tol) return s;
    if (gap > 0.0)
      lo = std::max(lo, s.drop);
    else
      hi = std::min(hi, s.drop);
    double next = s.tangent > 0.0 ? s.drop + gap / s.tangent : std::numeric_limits<double>::quiet_NaN();
    const bool bracketed = std::isfinite(lo) && std::isfinite(hi);
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      if (bracketed)
        next = 0.5 * (lo + hi);
      else
        next = s.drop + (gap > 0.0 ? 1e-3 : -1e-3);
    }
    s = at_drop(next);
  }
  throw NonConvergence(100, std::abs(load - s.load), "plate load iteration");
}

Profile axial_load_profile(const Configuration& config, double max_load, int steps, const SolverOptions& options) {
  check_profile_args(max_load, steps);
  PlateModel model(config, {}, options);
  Profile out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) {
    const double load = max_load * k / steps;
    try {
      if (k == 0) {
        const PlateState s = model.at_drop(0.0);
        out.push_back({0.0, 0.0, s.tangent, s.tangent});
      } else {
        const PlateState s = model.at_load(load);
        out.push_back({load, s.drop, s.drop > 0.0 ? load / s.drop : s.tangent, s.tangent});
      }
    } catch (const NonConvergence& e) {
      throw NonConvergence(e.iterations(), e.residual(), step_context(k, e.what()));
    } catch (const MechanismSingularity& e) {
      throw MechanismSingularity(step_context(k, e.what()));
    }
  }
  return out;
}

double spring_displacement(const SpringModel& m, double load) {
  const double knee = m.stiffness * m.travel;
  if (load <= knee) return load / m.stiffness;
  return m.travel + (load - knee) / m.bottom_stiffness;
}

namespace {

struct ProfileVisitor {
  double max_load;
  int steps;
  const SolverOptions& options;

  Profile operator()(const RigidModel& m) const {
    if (!(m.stiffness > 0.0)) throw InvalidInput("rigid stiffness must be > 0");
    Profile p;
    for (int k = 0; k <= steps; ++k) {
      const double f = max_load * k / steps;
      p.push_back({f, f / m.stiffness, m.stiffness, m.stiffness});
    }
    return p;
  }

  Profile operator()(const SpringModel& m) const {
    if (!(m.stiffness > 0.0) || !(m.bottom_stiffness > 0.0)) throw InvalidInput("spring stiffnesses must be > 0");
    if (!(m.travel > 0.0)) throw InvalidInput("spring travel must be > 0");
    const double knee = m.stiffness * m.travel;
    Profile p;
    for (int k = 0; k <= steps; ++k) {
      const double f = max_load * k / steps;
      const double d = spring_displacement(m, f);
      const double tangent = f <= knee ? m.stiffness : m.bottom_stiffness;
      p.push_back({f, d, k == 0 ? tangent : f / d, tangent});
    }
    return p;
  }

  Profile operator()(const TensegrityModel& m) const { return axial_load_profile(m.config, max_load, steps, options); }
};

}  // namespace

Profile comparison_device_profile(const DeviceModel& model, double max_load, int steps, const SolverOptions& options) {
  check_profile_args(max_load, steps);
  return std::visit(ProfileVisitor{max_load, steps, options}, model);
}

TerrainResult terrain_conformance(const Configuration& config, const LoadCase& load, const Terrain& terrain,
                                  const SolverOptions& options) {
  const Topology& t = config.topology;
  Vec3 total = Vec3::Zero();
  for (const auto& [id, f] : load.forces) {
    const auto i = t.node_index(id);
    if (t.nodes()[i].role != NodeRole::TopAttachment)
      throw InvalidInput("terrain load must act on top-attachment nodes (node " + std::to_string(id) + ")");
    total += f;
  }
  if (std::hypot(total.x(), total.y()) > 1e-9 * std::max(1.0, std::abs(total.z())))
    throw InvalidInput("terrain load must be vertical");

  PlateModel model(config, terrain, options);
  const PlateState s = model.at_load(-total.z());
  TerrainResult r{s.config, {}, Vec3::Zero(), s.drop};
  for (auto i : t.nodes_with_role(NodeRole::TopAttachment)) {
    const Vec3 v = -s.config.reactions.col(idx(i));
    r.top_reactions.push_back(v);
    r.resultant += v;
  }
  return r;
}

FailureReport check_member_failure(const Configuration& config, double module_limit) {
  const Topology& t = config.topology;
  if (config.member_forces.size() != idx(t.member_count()))
    throw InvalidInput("configuration has no member forces");
  FailureReport rep;
  rep.module_limit = module_limit;
  const auto& members = t.members();
  std::vector<bool> is_top(t.node_count(), false);
  for (auto i : t.nodes_with_role(NodeRole::TopAttachment)) is_top[i] = true;
  for (std::size_t j = 0; j < members.size(); ++j) {
    const double f = config.member_forces(idx(j));
    if (std::abs(f) >= members[j].failure_load)
      rep.members.push_back({members[j].id, f, members[j].failure_load, members[j].failure_load - std::abs(f)});
    const auto a = t.end_a(j);
    const auto b = t.end_b(j);
    const Vec3 d = config.coords.col(idx(a)) - config.coords.col(idx(b));
    const double gz = f * d.z() / d.norm();
    if (is_top[a]) rep.top_load -= gz;
    if (is_top[b]) rep.top_load += gz;
  }
  rep.module_warning = rep.top_load >= module_limit;
  return rep;
}

}  // namespace crutchlab::tensegrity
