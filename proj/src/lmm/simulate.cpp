#include "crutchlab/lmm/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace crutchlab::lmm {

LongDataset simulate_dataset(const SimulationTruth& truth, const SimulationDesign& design, std::uint64_t seed) {
  if (!(truth.var_participant >= 0.0) || !(truth.var_residual >= 0.0))
    throw InvalidInput("simulation variances must be >= 0");
  if (design.participants < 1 || design.blocks < 1 || design.trials < 1)
    throw InvalidInput("simulation design needs at least one participant, block and trial");

  LongDataset data;
  for (int p = 1; p <= design.participants; ++p) {
    char id[16];
    std::snprintf(id, sizeof id, "P%02d", p);
    for (Device d : kDevices)
      for (int b = 1; b <= design.blocks; ++b)
        for (int t = 1; t <= design.trials; ++t)
          data.rows.push_back({id, d, b, t, design.turning_blocks && b % 2 == 0, truth.spec.response, 0.0});
  }
  const Design x = design_matrix(truth.spec, data);
  if (truth.beta.size() != x.n_fixed())
    throw InvalidInput("truth has " + std::to_string(truth.beta.size()) + " coefficients, design has " +
                       std::to_string(x.n_fixed()));
  Eigen::VectorXd y = x.x * truth.beta;

  std::mt19937_64 rng(seed);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const double s0 = std::sqrt(truth.var_participant);
  const double s = std::sqrt(truth.var_residual);
  std::vector<double> intercepts(static_cast<std::size_t>(x.n_groups()));
  for (auto& u : intercepts) u = normal(rng);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double e = normal(rng);
    if (s0 > 0.0) y(i) += s0 * intercepts[static_cast<std::size_t>(x.group[static_cast<std::size_t>(i)])];
    if (s > 0.0) y(i) += s * e;
  }
  for (std::size_t i = 0; i < data.rows.size(); ++i) data.rows[i].value = y(static_cast<Eigen::Index>(i));
  return data;
}

}  // namespace crutchlab::lmm
