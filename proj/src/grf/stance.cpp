#include "crutchlab/grf/stance.hpp"

#include <cmath>

namespace crutchlab::grf {

std::string StanceVerdict::reasons() const {
  std::string out;
  auto add = [&out](const char* r) {
    if (!out.empty()) out += ';';
    out += r;
  };
  if (!duration_ok) add("duration");
  if (!peak_ok) add("peak");
  if (!rising_ok) add("rising");
  return out;
}

double interpolate(const Eigen::Ref<const Eigen::VectorXd>& y, double s) {
  const Eigen::Index n = y.size();
  if (n == 0) throw InvalidInput("cannot interpolate an empty series");
  if (s <= 0.0) return y(0);
  if (s >= static_cast<double>(n - 1)) return y(n - 1);
  const auto i = static_cast<Eigen::Index>(std::floor(s));
  const double w = s - static_cast<double>(i);
  return w == 0.0 ? y(i) : (1.0 - w) * y(i) + w * y(i + 1);
}

StanceVerdict validate_stance(const StanceCycle& c, const StanceCriteria& k) {
  if (!(c.body_weight > 0.0)) throw InvalidInput("body weight must be > 0");
  StanceVerdict v;
  const Eigen::Index n = c.size();
  v.duration_ok = c.duration >= k.min_duration - 1e-12;
  if (n == 0) return v;
  const Eigen::VectorXd f = c.force.row(Vertical).transpose();
  v.peak_ok = f.maxCoeff() >= c.body_weight * k.min_peak_fraction;

  const double end = k.rising_fraction * static_cast<double>(n - 1);
  const auto m = static_cast<Eigen::Index>(std::floor(end)) + 1;  // samples 0..floor(end)
  bool endpoint = interpolate(f, end) > f(0);
  double slope = 0.0;
  if (m >= 2) {
    const double tbar = 0.5 * static_cast<double>(m - 1);
    const double fbar = f.head(m).mean();
    double sxy = 0.0, sxx = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double dt = static_cast<double>(i) - tbar;
      sxy += dt * (f(i) - fbar);
      sxx += dt * dt;
    }
    slope = sxy / sxx;
  }
  v.rising_ok = endpoint && slope > 0.0;
  return v;
}

NormalizedStance normalize_stance(const StanceCycle& c) {
  if (c.size() < 2) throw InvalidInput("stance needs at least 2 samples to normalize");
  if (!(c.body_weight > 0.0)) throw InvalidInput("body weight must be > 0");
  NormalizedStance out;
  const double last = static_cast<double>(c.size() - 1);
  for (Eigen::Index axis = 0; axis < 3; ++axis) {
    const Eigen::VectorXd y = c.force.row(axis).transpose();
    for (int p = 0; p < kNormalizedPoints; ++p)
      out.bw(axis, p) = interpolate(y, p * last / (kNormalizedPoints - 1)) / c.body_weight;
  }
  return out;
}

}  // namespace crutchlab::grf
