#include "crutchlab/tensegrity/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "crutchlab/tensegrity/statics.hpp"

namespace crutchlab::tensegrity {

namespace {

std::string describe_nonconvergence(int iterations, double residual, const std::string& context) {
  std::ostringstream os;
  os << "solver did not converge after " << iterations << " iterations (residual " << residual << " N)";
  if (!context.empty()) os << ": " << context;
  return os.str();
}

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

Eigen::Map<const Eigen::VectorXd> stacked(const Coordinates& c) { return {c.data(), c.size()}; }
Eigen::Map<Eigen::VectorXd> stacked(Coordinates& c) { return {c.data(), c.size()}; }

void check_shape(const Topology& topology, const Coordinates& coords) {
  if (coords.cols() != idx(topology.node_count())) throw InvalidInput("coordinate count does not match node count");
  if (!coords.allFinite()) throw InvalidInput("non-finite coordinates");
}

struct DofMap {
  std::vector<Index> free;
  bool constrained = false;

  DofMap(std::size_t nodes, const std::vector<std::size_t>& fixed) {
    std::vector<bool> pinned(nodes, false);
    for (auto i : fixed) {
      if (i >= nodes) throw InvalidInput("fixed node index out of range");
      pinned[i] = true;
    }
    constrained = !fixed.empty();
    for (std::size_t i = 0; i < nodes; ++i)
      if (!pinned[i])
        for (Index k = 0; k < 3; ++k) free.push_back(3 * idx(i) + k);
  }

  Eigen::VectorXd gather(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(static_cast<Index>(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i) out(idx(i)) = v(free[i]);
    return out;
  }

  Eigen::MatrixXd gather(const Eigen::MatrixXd& k) const {
    const auto n = static_cast<Index>(free.size());
    Eigen::MatrixXd out(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) out(r, c) = k(free[r], free[c]);
    return out;
  }

  void scatter_add(Coordinates& x, const Eigen::VectorXd& du, double alpha) const {
    auto flat = stacked(x);
    for (std::size_t i = 0; i < free.size(); ++i) flat(free[i]) += alpha * du(idx(i));
  }
};

Eigen::VectorXd free_residual(const Topology& t, const Coordinates& x, const Coordinates& f, const DofMap& dofs) {
  const Coordinates r = internal_forces(t, x) - f;
  return dofs.gather(Eigen::VectorXd(stacked(r)));
}

struct NewtonOutcome {
  bool converged = false;
  bool rank_deficient = false;
  int iterations = 0;
  double residual = 0.0;
};

NewtonOutcome newton(const Topology& t, Coordinates& x, const Coordinates& f, const DofMap& dofs,
                     const SolverOptions& opt) {
  NewtonOutcome out;
  if (dofs.free.empty()) {
    out.converged = true;
    return out;
  }
  Eigen::VectorXd r = free_residual(t, x, f, dofs);
  for (int it = 0;; ++it) {
    out.iterations = it;
    out.residual = r.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(out.residual)) return out;
    if (out.residual < opt.tolerance) {
      out.converged = true;
      return out;
    }
    if (it >= opt.max_iterations) return out;

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(1e-10);
    cod.compute(dofs.gather(tangent_stiffness(t, x)));
    out.rank_deficient = out.rank_deficient || cod.rank() < cod.cols();
    const Eigen::VectorXd du = -cod.solve(r);

    const double r0 = r.norm();
    double alpha = 1.0;
    bool accepted = false;
    Coordinates trial;
    Eigen::VectorXd rt;
    while (alpha > 1e-6) {
      trial = x;
      dofs.scatter_add(trial, du, alpha);
      rt = free_residual(t, trial, f, dofs);
      if (rt.allFinite() && rt.norm() < (1.0 - 1e-4 * alpha) * r0) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return out;
    x = trial;
    r = rt;
  }
}

// Kinetic damping: explicit pseudo-dynamics with fictitious masses from a
// Gershgorin bound of the tangent, velocities reset at kinetic-energy peaks.
NewtonOutcome dynamic_relaxation(const Topology& t, Coordinates& x, const Coordinates& f, const DofMap& dofs,
                                 const SolverOptions& opt) {
  NewtonOutcome out;
  const auto nf = static_cast<Index>(dofs.free.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(nf);
  Eigen::VectorXd mass(nf);
  const double target = std::max(opt.tolerance, 1e-3);
  double ke_prev = 0.0;
  for (int it = 0; it < opt.dr_max_iterations; ++it) {
    if (it % 200 == 0) {
      const Eigen::MatrixXd k = dofs.gather(tangent_stiffness(t, x));
      for (Index i = 0; i < nf; ++i) mass(i) = std::max(k.row(i).cwiseAbs().sum(), 1e-9);
    }
    const Eigen::VectorXd r = free_residual(t, x, f, dofs);
    out.iterations = it;
    out.residual = r.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(out.residual)) return out;
    if (out.residual < target) {
      out.converged = true;
      return out;
    }
    v -= r.cwiseQuotient(mass);
    const double ke = v.cwiseProduct(mass).dot(v);
    if (ke < ke_prev) {
      v.setZero();
      ke_prev = 0.0;
      continue;
    }
    ke_prev = ke;
    dofs.scatter_add(x, v, 1.0);
  }
  return out;
}

Coordinates zeros_like(const Topology& t) { return Coordinates::Zero(3, idx(t.node_count())); }

void fill_failure_flag(Configuration& c) {
  c.failure_warning = false;
  const auto& members = c.topology.members();
  for (std::size_t j = 0; j < members.size(); ++j)
    if (std::abs(c.member_forces(idx(j))) >= members[j].failure_load) c.failure_warning = true;
}

}  // namespace

NonConvergence::NonConvergence(int iterations, double residual, const std::string& context)
    : Error(describe_nonconvergence(iterations, residual, context)), iterations_(iterations), residual_(residual) {}

LoadCase LoadCase::uniform_vertical(const Topology& topology, NodeRole role, double total_z) {
  const auto nodes = topology.nodes_with_role(role);
  if (nodes.empty()) throw InvalidInput("no nodes with the requested role");
  LoadCase lc;
  for (auto i : nodes) lc.forces[topology.nodes()[i].id] = Vec3(0.0, 0.0, total_z / static_cast<double>(nodes.size()));
  return lc;
}

void Terrain::validate(const Topology& topology) const {
  std::size_t raised = 0;
  for (const auto& [id, dz] : offsets) {
    const auto i = topology.node_index(id);
    if (topology.nodes()[i].role != NodeRole::GroundContact)
      throw InvalidInput("terrain offset on node " + std::to_string(id) + ", which is not ground-contact");
    if (!std::isfinite(dz)) throw InvalidInput("terrain offset must be finite");
    raised += (dz != 0.0);
  }
  if (raised >= topology.nodes_with_role(NodeRole::GroundContact).size())
    throw InvalidInput("terrain needs at least one ground node at reference height 0");
}

Eigen::VectorXd member_lengths(const Topology& topology, const Coordinates& coords) {
  check_shape(topology, coords);
  const auto m = idx(topology.member_count());
  Eigen::VectorXd l(m);
  for (Index j = 0; j < m; ++j)
    l(j) = (coords.col(idx(topology.end_a(j))) - coords.col(idx(topology.end_b(j)))).norm();
  return l;
}

Eigen::VectorXd member_forces(const Topology& topology, const Coordinates& coords) {
  const Eigen::VectorXd l = member_lengths(topology, coords);
  Eigen::VectorXd t(l.size());
  const auto& members = topology.members();
  for (Index j = 0; j < l.size(); ++j) {
    const Member& m = members[j];
    const double l0 = m.effective_rest_length();
    double force = m.axial_rigidity * (l(j) - l0) / l0;
    if (m.kind == MemberKind::Cable && force < 0.0) force = 0.0;
    t(j) = force;
  }
  return t;
}

Coordinates internal_forces(const Topology& topology, const Coordinates& coords) {
  const Eigen::VectorXd t = member_forces(topology, coords);
  Coordinates g = zeros_like(topology);
  for (Index j = 0; j < t.size(); ++j) {
    if (t(j) == 0.0) continue;
    const auto a = idx(topology.end_a(j));
    const auto b = idx(topology.end_b(j));
    const Vec3 d = coords.col(a) - coords.col(b);
    const Vec3 p = d * (t(j) / d.norm());
    g.col(a) += p;
    g.col(b) -= p;
  }
  return g;
}

Eigen::MatrixXd tangent_stiffness(const Topology& topology, const Coordinates& coords) {
  const Eigen::VectorXd l = member_lengths(topology, coords);
  const auto n = idx(topology.node_count());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  const auto& members = topology.members();
  for (Index j = 0; j < l.size(); ++j) {
    const Member& m = members[j];
    const double l0 = m.effective_rest_length();
    const double t = m.axial_rigidity * (l(j) - l0) / l0;
    if (m.kind == MemberKind::Cable && l(j) < l0) continue;  // slack
    if (l(j) == 0.0) throw DegenerateGeometry("zero-length member in tangent stiffness");
    const auto a = idx(topology.end_a(j));
    const auto b = idx(topology.end_b(j));
    const Vec3 e = (coords.col(a) - coords.col(b)) / l(j);
    const Eigen::Matrix3d ee = e * e.transpose();
    const Eigen::Matrix3d kk = (m.axial_rigidity / l0) * ee + (t / l(j)) * (Eigen::Matrix3d::Identity() - ee);
    k.block<3, 3>(3 * a, 3 * a) += kk;
    k.block<3, 3>(3 * b, 3 * b) += kk;
    k.block<3, 3>(3 * a, 3 * b) -= kk;
    k.block<3, 3>(3 * b, 3 * a) -= kk;
  }
  return k;
}

Eigen::MatrixXd tangent_stiffness(const Configuration& config) {
  return tangent_stiffness(config.topology, config.coords);
}

double constrained_min_eigenvalue(const Configuration& config) {
  std::vector<std::size_t> fixed;
  for (int id : config.supports) fixed.push_back(config.topology.node_index(id));
  const DofMap dofs(config.topology.node_count(), fixed);
  if (dofs.free.empty()) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dofs.gather(tangent_stiffness(config)),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

EquilibriumResult solve_equilibrium(const Topology& topology, const Coordinates& start,
                                    const std::vector<std::size_t>& fixed, const Coordinates& loads,
                                    const SolverOptions& options) {
  check_shape(topology, start);
  check_shape(topology, loads);
  const DofMap dofs(topology.node_count(), fixed);
  Coordinates x = start;
  NewtonOutcome out = newton(topology, x, loads, dofs, options);
  int total = out.iterations;
  if (!out.converged && options.dynamic_relaxation_fallback) {
    Coordinates y = start;
    const NewtonOutcome dr = dynamic_relaxation(topology, y, loads, dofs, options);
    total += dr.iterations;
    if (dr.residual < out.residual || !std::isfinite(out.residual)) {
      SolverOptions polish = options;
      const NewtonOutcome p = newton(topology, y, loads, dofs, polish);
      total += p.iterations;
      if (p.converged || p.residual < out.residual) {
        x = y;
        out = p;
      }
    }
  }
  if (!out.converged) {
    if (dofs.constrained && out.rank_deficient)
      throw MechanismSingularity("constrained tangent stiffness is singular (residual " +
                                 std::to_string(out.residual) + " N)");
    throw NonConvergence(total, out.residual);
  }
  return {x, total, out.residual};
}

EquilibriumResult solve_with_continuation(const Topology& topology, const Coordinates& start,
                                          const std::vector<std::size_t>& fixed,
                                          const Coordinates& target_fixed_positions,
                                          const Coordinates& start_loads, const Coordinates& target_loads,
                                          const SolverOptions& options) {
  check_shape(topology, target_fixed_positions);
  double lambda = 0.0;
  double step = 1.0;
  EquilibriumResult current{start, 0, 0.0};
  int total = 0;
  std::exception_ptr last_error;
  while (lambda < 1.0) {
    const double next = std::min(1.0, lambda + step);
    Coordinates trial = current.coords;
    for (auto i : fixed)
      trial.col(idx(i)) = start.col(idx(i)) + next * (target_fixed_positions.col(idx(i)) - start.col(idx(i)));
    const Coordinates f = start_loads + next * (target_loads - start_loads);
    try {
      current = solve_equilibrium(topology, trial, fixed, f, options);
      total += current.iterations;
      lambda = next;
      step = std::min(1.0, 2.0 * step);
    } catch (const NonConvergence&) {
      last_error = std::current_exception();
    } catch (const MechanismSingularity&) {
      last_error = std::current_exception();
    }
    if (lambda < next) {
      step *= 0.5;
      if (step < options.min_increment) std::rethrow_exception(last_error);
    }
  }
  current.iterations = total;
  return current;
}

void refresh_state(Configuration& c) {
  check_shape(c.topology, c.coords);
  if (c.loads.cols() != c.coords.cols()) c.loads = zeros_like(c.topology);
  c.member_forces = member_forces(c.topology, c.coords);
  const Coordinates g = internal_forces(c.topology, c.coords);
  c.reactions = zeros_like(c.topology);
  std::vector<bool> pinned(c.topology.node_count(), false);
  for (int id : c.supports) pinned[c.topology.node_index(id)] = true;
  double r = 0.0;
  for (std::size_t i = 0; i < pinned.size(); ++i) {
    const Vec3 d = g.col(idx(i)) - c.loads.col(idx(i));
    if (pinned[i])
      c.reactions.col(idx(i)) = d;
    else
      r = std::max(r, d.lpNorm<Eigen::Infinity>());
  }
  c.residual = r;
  fill_failure_flag(c);
}

Configuration apply_prestress(const Topology& topology, double strut_extension, const SolverOptions& options) {
  if (!(strut_extension >= 0.0) || !std::isfinite(strut_extension))
    throw InvalidInput("strut_extension must be >= 0");
  const Coordinates reference = topology.reference_coordinates();
  const auto ground = topology.nodes_with_role(NodeRole::GroundContact);

  Coordinates x = reference;
  int iterations = 0;
  if (strut_extension > 0.0) {
    find_self_stress(topology, reference);
    const Coordinates no_load = zeros_like(topology);
    const int substeps = std::max(1, options.prestress_substeps);
    double done = 0.0;
    double step = 1.0 / substeps;
    std::exception_ptr last_error;
    while (done < 1.0) {
      const double next = std::min(1.0, done + step);
      try {
        const auto r = solve_equilibrium(topology.with_strut_extension(next * strut_extension), x, {}, no_load, options);
        x = r.coords;
        iterations += r.iterations;
        done = next;
      } catch (const NonConvergence&) {
        last_error = std::current_exception();
        step *= 0.5;
        if (step < options.min_increment / substeps) std::rethrow_exception(last_error);
      }
    }
  }

  const Topology extended = topology.with_strut_extension(strut_extension);
  if (!ground.empty()) {
    double z = 0.0;
    for (auto i : ground) z += x(2, idx(i));
    x.row(2).array() -= z / static_cast<double>(ground.size());
    // Snap the feet onto z = 0 exactly and settle the rest against them, so
    // later terrain heights are absolute.
    if (strut_extension > 0.0) {
      for (auto i : ground) x(2, idx(i)) = 0.0;
      const auto r = solve_equilibrium(extended, x, ground, zeros_like(topology), options);
      x = r.coords;
      iterations += r.iterations;
    }
  }

  Configuration c{extended, x, {}, {}, zeros_like(topology), {}, false, 0, 0.0};
  for (auto i : ground) c.supports.push_back(topology.nodes()[i].id);
  refresh_state(c);
  c.iterations = iterations;
  return c;
}

Configuration solve_static(const Configuration& config, const LoadCase& loads, const Terrain& terrain,
                           const SolverOptions& options) {
  const Topology& topology = config.topology;
  terrain.validate(topology);
  const auto ground = topology.nodes_with_role(NodeRole::GroundContact);
  std::vector<bool> pinned(topology.node_count(), false);
  for (auto i : ground) pinned[i] = true;

  Coordinates target_loads = zeros_like(topology);
  for (const auto& [id, f] : loads.forces) {
    const auto i = topology.node_index(id);
    if (pinned[i]) throw InvalidInput("load applied to support node " + std::to_string(id));
    if (!f.allFinite()) throw InvalidInput("non-finite load");
    target_loads.col(idx(i)) += f;
  }

  Coordinates target = config.coords;
  for (auto i : ground) {
    const auto it = terrain.offsets.find(topology.nodes()[i].id);
    target(2, idx(i)) = it == terrain.offsets.end() ? 0.0 : it->second;
  }
  Coordinates start_loads = config.loads.cols() == config.coords.cols() ? config.loads : zeros_like(topology);
  for (auto i : ground) start_loads.col(idx(i)).setZero();

  const auto r = solve_with_continuation(topology, config.coords, ground, target, start_loads, target_loads, options);

  Configuration out = config;
  out.coords = r.coords;
  out.loads = target_loads;
  out.supports.clear();
  for (auto i : ground) out.supports.push_back(topology.nodes()[i].id);
  refresh_state(out);
  out.iterations = r.iterations;
  return out;
}

}  // namespace crutchlab::tensegrity
