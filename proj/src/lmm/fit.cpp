#include "crutchlab/lmm/fit.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "crutchlab/lmm/inference.hpp"

namespace crutchlab::lmm {

namespace {

constexpr double kLogThetaMin = -18.0;
constexpr double kLogThetaMax = 14.0;
constexpr int kGridPoints = 81;

}  // namespace

ProfileLikelihood::ProfileLikelihood(const Design& design, Method method) : design_(design), method_(method) {
  const Eigen::Index p = design.n_fixed();
  const int g = design.n_groups();
  if (g < 2) throw FitError("random-intercept model needs ≥ 2 groups (got " + std::to_string(g) + ")");
  if (design.n_obs() <= p) throw FitError("more coefficients than observations");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
  if (qr.rank() < p) {
    std::string cols;
    // Name a column that is a combination of the others.
    const auto perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < p; ++k)
      cols += (cols.empty() ? "" : ", ") + design.labels[static_cast<std::size_t>(perm(k))];
    throw FitError("design matrix is rank deficient (" + std::to_string(qr.rank()) + " of " + std::to_string(p) +
                   "; dependent: " + cols + ")");
  }
  xtx_ = design.x.transpose() * design.x;
  xty_ = design.x.transpose() * design.y;
  group_sums_x_ = Eigen::MatrixXd::Zero(p, g);
  group_sums_y_ = Eigen::VectorXd::Zero(g);
  group_sizes_ = Eigen::VectorXd::Zero(g);
  for (Eigen::Index i = 0; i < design.n_obs(); ++i) {
    const int k = design.group[static_cast<std::size_t>(i)];
    group_sums_x_.col(k) += design.x.row(i).transpose();
    group_sums_y_(k) += design.y(i);
    group_sizes_(k) += 1.0;
  }
}

Eigen::VectorXd ProfileLikelihood::residual(const Eigen::VectorXd& beta) const {
  return design_.y - design_.x * beta;
}

ProfileLikelihood::Point ProfileLikelihood::at(double theta) const {
  Point pt;
  pt.theta = theta;
  const Eigen::ArrayXd w = theta / (1.0 + theta * group_sizes_.array());
  pt.xtvx = xtx_ - group_sums_x_ * w.matrix().asDiagonal() * group_sums_x_.transpose();
  const Eigen::VectorXd rhs = xty_ - group_sums_x_ * (w * group_sums_y_.array()).matrix();
  const Eigen::LLT<Eigen::MatrixXd> llt(pt.xtvx);
  if (llt.info() != Eigen::Success) throw FitError("X' V^-1 X is not positive definite at theta " + std::to_string(theta));
  pt.beta = llt.solve(rhs);

  const Eigen::VectorXd r = residual(pt.beta);
  Eigen::VectorXd rsum = Eigen::VectorXd::Zero(group_sizes_.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) rsum(design_.group[static_cast<std::size_t>(i)]) += r(i);
  pt.rss = r.squaredNorm() - (w * rsum.array().square()).sum();

  const double n = static_cast<double>(design_.n_obs());
  const double p = static_cast<double>(design_.n_fixed());
  const double logdet = (1.0 + theta * group_sizes_.array()).log().sum();
  constexpr double log2pi = 1.8378770664093454836;
  if (method_ == Method::ML) {
    pt.sigma2 = pt.rss / n;
    pt.loglik = -0.5 * n * (log2pi + std::log(pt.sigma2) + 1.0) - 0.5 * logdet;
  } else {
    pt.sigma2 = pt.rss / (n - p);
    const double logdet_m = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    pt.loglik = -0.5 * (n - p) * (log2pi + std::log(pt.sigma2) + 1.0) - 0.5 * logdet - 0.5 * logdet_m;
  }
  return pt;
}

double ProfileLikelihood::derivative(double theta) const {
  const Point pt = at(theta);
  const Eigen::ArrayXd d = 1.0 + theta * group_sizes_.array();
  const Eigen::VectorXd r = residual(pt.beta);
  Eigen::ArrayXd rsum = Eigen::ArrayXd::Zero(group_sizes_.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) rsum(design_.group[static_cast<std::size_t>(i)]) += r(i);
  const double drss = -(rsum.square() / d.square()).sum();
  const double n = static_cast<double>(design_.n_obs());
  const double p = static_cast<double>(design_.n_fixed());
  double g = -0.5 * (group_sizes_.array() / d).sum();
  if (method_ == Method::ML) return g - 0.5 * n * drss / pt.rss;
  g -= 0.5 * (n - p) * drss / pt.rss;
  const Eigen::MatrixXd dm = -(group_sums_x_ * (1.0 / d.square()).matrix().asDiagonal() * group_sums_x_.transpose());
  return g - 0.5 * pt.xtvx.llt().solve(dm).trace();
}

double FitResult::p_value(Eigen::Index i) const {
  const boost::math::normal nd;
  return 2.0 * boost::math::cdf(boost::math::complement(nd, std::abs(z(i))));
}

Eigen::Index FitResult::coefficient(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<Eigen::Index>(i);
  throw InvalidInput("coefficient '" + label + "' is not in the model");
}

namespace {

FitResult make_result(const ModelSpec& spec, const Design& design, const ProfileLikelihood::Point& pt, int evals) {
  if (!std::isfinite(pt.loglik) || !(pt.sigma2 > 0.0))
    throw FitError("non-finite likelihood for '" + spec.response + "' (residual variance " +
                   std::to_string(pt.sigma2) + ")");
  FitResult f{spec, design.labels, pt.beta, {}, {}, 0, 0, 0, false, 0, 0, 0, 0, 0, 0, evals};
  f.covariance = pt.sigma2 * pt.xtvx.llt().solve(Eigen::MatrixXd::Identity(pt.xtvx.rows(), pt.xtvx.cols()));
  f.se = f.covariance.diagonal().cwiseSqrt();
  f.theta = pt.theta;
  f.boundary = pt.theta == 0.0;
  f.sigma2_residual = pt.sigma2;
  f.sigma2_participant = pt.theta * pt.sigma2;
  f.loglik = pt.loglik;
  f.n_obs = static_cast<long>(design.n_obs());
  f.n_groups = design.n_groups();
  f.n_params = static_cast<int>(design.n_fixed()) + 2;
  const auto ic = information_criteria(f.loglik, f.n_params, f.n_obs);
  f.aic = ic.aic;
  f.bic = ic.bic;
  return f;
}

}  // namespace

FitResult fit_at_theta(const ModelSpec& spec, const Design& design, double theta) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw InvalidInput("theta must be finite and >= 0");
  const ProfileLikelihood prof(design, spec.method);
  return make_result(spec, design, prof.at(theta), 1);
}

FitResult fit_random_intercept(const ModelSpec& spec, const LongDataset& data) {
  return fit_random_intercept(spec, design_matrix(spec, data));
}

FitResult fit_random_intercept(const ModelSpec& spec, const Design& design) {
  const ProfileLikelihood prof(design, spec.method);
  int evals = 0;
  auto ll = [&](double phi) {
    ++evals;
    return prof.loglik(std::exp(phi));
  };

  // Coarse grid on log theta to bracket the maximum.
  const double step = (kLogThetaMax - kLogThetaMin) / (kGridPoints - 1);
  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kGridPoints; ++k) {
    const double v = ll(kLogThetaMin + step * k);
    if (v > best_ll) {
      best_ll = v;
      best = k;
    }
  }
  const double lo = kLogThetaMin + step * std::max(best - 1, 0);
  const double hi = kLogThetaMin + step * std::min(best + 1, kGridPoints - 1);

  // Golden-section / parabolic refinement.
  boost::uintmax_t iters = 200;
  const auto [phi_b, neg_ll] = boost::math::tools::brent_find_minima(
      [&](double phi) { return -ll(phi); }, lo, hi, std::numeric_limits<double>::digits / 2, iters);
  double phi_hat = phi_b;
  double ll_hat = -neg_ll;

  // Polish on the score: the profile is flat near the optimum, the score is not.
  auto score = [&](double phi) {
    ++evals;
    const double t = std::exp(phi);
    return t * prof.derivative(t);
  };
  double a = std::max(phi_hat - 1e-3, lo), b = std::min(phi_hat + 1e-3, hi);
  double sa = score(a), sb = score(b);
  for (int k = 0; k < 8 && sa > 0.0 && sb > 0.0 && b < hi; ++k) sb = score(b = std::min(b + 4.0 * (b - a), hi));
  for (int k = 0; k < 8 && sa < 0.0 && sb < 0.0 && a > lo; ++k) sa = score(a = std::max(a - 4.0 * (b - a), lo));
  if (sa > 0.0 && sb < 0.0) {
    boost::uintmax_t root_iters = 100;
    const auto [r0, r1] = boost::math::tools::toms748_solve(score, a, b, sa, sb,
                                                            boost::math::tools::eps_tolerance<double>(50), root_iters);
    const double phi_r = 0.5 * (r0 + r1);
    const double ll_r = ll(phi_r);
    // The profile is flat to rounding near the optimum; trust the score root
    // unless it is clearly worse.
    if (ll_r >= ll_hat - 1e-11 * (1.0 + std::abs(ll_hat))) {
      phi_hat = phi_r;
      ll_hat = ll_r;
    }
  }

  // Boundary: theta = 0 is ordinary least squares.
  ++evals;
  const ProfileLikelihood::Point at_zero = prof.at(0.0);
  if (at_zero.loglik >= ll_hat) return make_result(spec, design, at_zero, evals);
  return make_result(spec, design, prof.at(std::exp(phi_hat)), evals);
}

nlohmann::json to_json(const FitResult& f) {
  nlohmann::json coef = nlohmann::json::array();
  for (std::size_t i = 0; i < f.labels.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    coef.push_back({{"label", f.labels[i]},
                    {"estimate", f.beta(k)},
                    {"se", f.se(k)},
                    {"z", f.z(k)},
                    {"p", f.p_value(k)}});
  }
  nlohmann::json terms = nlohmann::json::array();
  for (Term t : f.spec.terms) terms.push_back(std::string(to_string(t)));
  return {{"response", f.spec.response},
          {"terms", terms},
          {"method", std::string(to_string(f.spec.method))},
          {"baseline", std::string(to_string(f.spec.baseline))},
          {"coefficients", coef},
          {"var_participant", f.sigma2_participant},
          {"var_residual", f.sigma2_residual},
          {"theta", f.theta},
          {"boundary", f.boundary},
          {"loglik", f.loglik},
          {"aic", f.aic},
          {"bic", f.bic},
          {"n_obs", f.n_obs},
          {"n_groups", f.n_groups},
          {"n_params", f.n_params},
          {"p_value_method", "normal approximation (z)"}};
}

}  // namespace crutchlab::lmm
