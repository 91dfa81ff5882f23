#include "crutchlab/grf/speed.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace crutchlab::grf {

double walking_speed(const MarkerTrack& track) {
  if (!(track.sample_rate > 0.0)) throw InvalidInput("marker sample_rate must be > 0");
  const Eigen::Index n = track.positions.cols();
  if (n < 2) throw InvalidInput("walking speed needs at least 2 marker samples");
  if (!track.positions.allFinite()) throw InvalidInput("marker positions must be finite");

  const Eigen::Matrix2Xd xy = track.positions.topRows<2>();
  const Eigen::Vector2d mean = xy.rowwise().mean();
  const Eigen::Matrix2Xd centred = xy.colwise() - mean;
  const Eigen::Matrix2d cov = centred * centred.transpose() / static_cast<double>(n);
  if (cov.trace() < 1e-9) throw InvalidInput("marker track is stationary");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Vector2d axis = es.eigenvectors().col(1);  // largest eigenvalue

  double total = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) total += std::abs(axis.dot(xy.col(i) - xy.col(i - 1)));
  return total / static_cast<double>(n - 1) * track.sample_rate;
}

}  // namespace crutchlab::grf
