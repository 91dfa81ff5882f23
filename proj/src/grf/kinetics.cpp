#include "crutchlab/grf/kinetics.hpp"

#include <cmath>
#include <limits>

namespace crutchlab::grf {

LoadingRate peak_loading_rate(const StanceCycle& c, const LoadingRateOptions& o) {
  if (!(c.body_weight > 0.0)) throw InvalidInput("body weight must be > 0");
  if (!(o.bin > 0.0) || !(o.window >= o.bin)) throw InvalidInput("loading-rate window must hold at least one bin");
  const auto bin = std::max<Eigen::Index>(1, std::llround(o.bin * c.sample_rate));
  const auto window = std::llround(o.window * c.sample_rate);
  LoadingRate out;
  const Eigen::Index last = c.size() - 1;
  Eigen::Index span = window;
  if (last < window) {
    out.truncated = true;
    span = last;
  }
  const double dt = static_cast<double>(bin) / c.sample_rate;
  for (Eigen::Index axis = 0; axis < 3; ++axis) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index s = 0; s + bin <= span; ++s) {
      double slope = (c.force(axis, s + bin) - c.force(axis, s)) / dt;
      if (axis != Vertical) slope = std::abs(slope);
      best = std::max(best, slope);
    }
    out.peak[static_cast<std::size_t>(axis)] =
        std::isfinite(best) ? best / c.body_weight : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

Impulses impulse_between(const StanceCycle& c, Eigen::Index first, Eigen::Index last) {
  if (!(c.body_weight > 0.0)) throw InvalidInput("body weight must be > 0");
  if (first < 0 || last >= c.size() || last < first) throw InvalidInput("impulse range outside stance");
  const double h = 0.5 / c.sample_rate;
  Impulses out;
  for (Eigen::Index i = first; i < last; ++i) {
    const double v0 = c.force(Vertical, i), v1 = c.force(Vertical, i + 1);
    const double a0 = c.force(AP, i), a1 = c.force(AP, i + 1);
    const double m0 = c.force(ML, i), m1 = c.force(ML, i + 1);
    out.vertical += h * (v0 + v1);
    out.ap_braking += h * (std::max(-a0, 0.0) + std::max(-a1, 0.0));
    out.ap_propulsive += h * (std::max(a0, 0.0) + std::max(a1, 0.0));
    out.ml += h * (std::abs(m0) + std::abs(m1));
  }
  out.vertical /= c.body_weight;
  out.ap_braking /= c.body_weight;
  out.ap_propulsive /= c.body_weight;
  out.ml /= c.body_weight;
  return out;
}

Impulses stance_impulse(const StanceCycle& c) {
  if (c.size() == 0) throw InvalidInput("empty stance");
  return impulse_between(c, 0, c.size() - 1);
}

}  // namespace crutchlab::grf
