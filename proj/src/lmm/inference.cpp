#include "crutchlab/lmm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace crutchlab::lmm {

InformationCriteria information_criteria(double loglik, int n_params, long n_obs) {
  return {-2.0 * loglik + 2.0 * n_params, -2.0 * loglik + n_params * std::log(static_cast<double>(n_obs))};
}

InformationCriteria information_criteria(const FitResult& fit) {
  return information_criteria(fit.loglik, fit.n_params, fit.n_obs);
}

LrtResult likelihood_ratio(double loglik_small, double loglik_large, int df) {
  if (df < 0) throw InvalidInput("likelihood ratio test with negative df");
  LrtResult r;
  r.chi2 = std::max(0.0, 2.0 * (loglik_large - loglik_small));
  r.df = df;
  if (df > 0) r.p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), r.chi2));
  return r;
}

LrtResult likelihood_ratio_test(const FitResult& small, const FitResult& large) {
  const bool same_fixed = small.labels == large.labels;
  if (!same_fixed && (small.spec.method == Method::REML || large.spec.method == Method::REML))
    throw InvalidInput("likelihood ratio test of REML fits with different fixed effects is invalid; refit with ML");
  if (small.spec.method != large.spec.method) throw InvalidInput("likelihood ratio test mixes ML and REML fits");
  if (small.n_obs != large.n_obs) throw InvalidInput("likelihood ratio test on different data");
  for (const auto& l : small.labels)
    if (std::find(large.labels.begin(), large.labels.end(), l) == large.labels.end())
      throw InvalidInput("model with '" + l + "' is not nested in the larger model");
  return likelihood_ratio(small.loglik, large.loglik, large.n_params - small.n_params);
}

namespace {

double normal_two_sided(double z) {
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), std::abs(z)));
}

}  // namespace

ContrastResult device_contrast(const FitResult& fit, Device first, Device second) {
  if (!fit.spec.has(Term::Device)) throw InvalidInput("contrast: Device is not in the model");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(fit.beta.size());
  if (first != fit.spec.baseline) c(fit.coefficient(device_label(first))) += 1.0;
  if (second != fit.spec.baseline) c(fit.coefficient(device_label(second))) -= 1.0;
  ContrastResult r;
  r.label = device_label(first) + " - " + device_label(second);
  r.first = first;
  r.second = second;
  r.estimate = c.dot(fit.beta);
  r.se = std::sqrt(c.dot(fit.covariance * c));
  r.z = r.se > 0.0 ? r.estimate / r.se : 0.0;
  r.p = normal_two_sided(r.z);
  r.p_adjusted = r.p;
  return r;
}

std::vector<ContrastResult> pairwise_contrasts(const FitResult& fit, Term factor) {
  if (factor != Term::Device) throw InvalidInput("pairwise contrasts are defined for the Device factor");
  std::vector<ContrastResult> out;
  for (std::size_t i = 0; i < std::size(kDevices); ++i)
    for (std::size_t j = i + 1; j < std::size(kDevices); ++j) out.push_back(device_contrast(fit, kDevices[i], kDevices[j]));
  std::vector<double> p;
  for (const auto& c : out) p.push_back(c.p);
  const auto adj = holm_adjust(p);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].p_adjusted = adj[i];
  return out;
}

std::vector<double> holm_adjust(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    running = std::max(running, std::min(1.0, static_cast<double>(m - k) * p[order[k]]));
    out[order[k]] = running;
  }
  return out;
}

EffectSize partial_eta_squared(const FitResult& fit, Term term) {
  const auto cols = term_columns(fit.spec, term);
  const auto k = static_cast<Eigen::Index>(cols.size());
  Eigen::VectorXd b(k);
  Eigen::MatrixXd v(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    b(i) = fit.beta(cols[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j) v(i, j) = fit.covariance(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
  }
  EffectSize e;
  e.wald = b.dot(v.ldlt().solve(b));
  e.df_num = static_cast<int>(k);
  e.df_den = fit.n_obs - fit.n_fixed();
  e.value = e.wald / (e.wald + static_cast<double>(e.df_den));
  e.formula = "partial eta^2 = F*df1/(F*df1 + df2); F = Wald/df1, df2 = n_obs - n_fixed";
  return e;
}

}  // namespace crutchlab::lmm
