#include "crutchlab/tensegrity/statics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>

namespace crutchlab::tensegrity {

namespace {

void check_coords(const Topology& topology, const Coordinates& coords) {
  if (coords.cols() != static_cast<Eigen::Index>(topology.node_count()))
    throw InvalidInput("coordinate count does not match node count");
  if (!coords.allFinite()) throw InvalidInput("non-finite coordinates");
}

}  // namespace

Eigen::MatrixXd equilibrium_matrix(const Topology& topology, const Coordinates& coords) {
  check_coords(topology, coords);
  const auto n = static_cast<Eigen::Index>(topology.node_count());
  const auto m = static_cast<Eigen::Index>(topology.member_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3 * n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto ia = static_cast<Eigen::Index>(topology.end_a(j));
    const auto ib = static_cast<Eigen::Index>(topology.end_b(j));
    const Vec3 d = coords.col(ia) - coords.col(ib);
    if (d.norm() == 0.0)
      throw DegenerateGeometry("member " + std::to_string(topology.members()[j].id) + " has zero length");
    a.block<3, 1>(3 * ia, j) = d;
    a.block<3, 1>(3 * ib, j) = -d;
  }
  return a;
}

SelfStress find_self_stress(const Topology& topology, const Coordinates& coords) {
  const Eigen::MatrixXd a = equilibrium_matrix(topology, coords);
  const auto m = a.cols();

  // Work in member forces t = q L: the unit-direction matrix B = A diag(1/L)
  // makes the flexibility weighting below dimensionally consistent.
  Eigen::VectorXd length(m);
  for (Eigen::Index j = 0; j < m; ++j)
    length(j) = (coords.col(static_cast<Eigen::Index>(topology.end_a(j))) -
                 coords.col(static_cast<Eigen::Index>(topology.end_b(j))))
                    .norm();
  const Eigen::MatrixXd b = a * length.cwiseInverse().asDiagonal();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cut = kNullSpaceTolerance * (s.size() > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cut) ++rank;
  const Eigen::Index nullity = m - rank;
  if (nullity == 0) throw NoSelfStress("equilibrium matrix has an empty null space");
  const Eigen::MatrixXd null = svd.matrixV().rightCols(nullity);

  Eigen::VectorXd flexibility(m), strut(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Member& mem = topology.members()[j];
    flexibility(j) = length(j) / mem.axial_rigidity;
    strut(j) = mem.kind == MemberKind::Strut ? 1.0 : 0.0;
  }

  Eigen::VectorXd t;
  if (nullity == 1) {
    t = null.col(0);
  } else {
    const Eigen::MatrixXd h = null.transpose() * flexibility.asDiagonal() * null;
    t = -null * h.ldlt().solve(null.transpose() * strut);
    if (t.lpNorm<Eigen::Infinity>() < 1e-12)
      throw SignInfeasible("no self-stress state is excited by strut elongation");
  }

  Eigen::VectorXd q = t.cwiseQuotient(length);
  Eigen::Index imax = 0;
  q.cwiseAbs().maxCoeff(&imax);
  q /= std::abs(q(imax));
  // Orient so struts are in compression.
  if (strut.dot(q) > 0.0 || (strut.dot(q) == 0.0 && q.sum() < 0.0)) q = -q;

  constexpr double sign_tol = 1e-9;
  for (Eigen::Index j = 0; j < m; ++j) {
    const bool ok = strut(j) > 0 ? q(j) <= sign_tol : q(j) >= -sign_tol;
    if (!ok)
      throw SignInfeasible("self-stress puts member " + std::to_string(topology.members()[j].id) +
                           " in the wrong sign");
  }
  return {q, static_cast<int>(nullity)};
}

}  // namespace crutchlab::tensegrity
