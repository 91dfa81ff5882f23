#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "crutchlab/lmm/design.hpp"

namespace crutchlab::lmm {

/// Estimation failed: rank deficiency, too few groups, non-finite likelihood.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Per-group sufficient statistics of a design; everything the profiled
/// likelihood needs for any theta = sigma0^2 / sigma^2.
class ProfileLikelihood {
 public:
  ProfileLikelihood(const Design& design, Method method);

  struct Point {
    double theta = 0.0;
    Eigen::VectorXd beta;
    Eigen::MatrixXd xtvx;  // X' Lambda^-1 X, Lambda = I + theta Z Z'
    double rss = 0.0;      // r' Lambda^-1 r
    double sigma2 = 0.0;
    double loglik = 0.0;
  };

  Point at(double theta) const;
  double loglik(double theta) const { return at(theta).loglik; }
  /// d loglik / d theta.
  double derivative(double theta) const;
  Method method() const { return method_; }

 private:
  Eigen::VectorXd residual(const Eigen::VectorXd& beta) const;

  const Design& design_;
  Method method_;
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd xty_;
  Eigen::MatrixXd group_sums_x_;  // p x G
  Eigen::VectorXd group_sums_y_;
  Eigen::VectorXd group_sizes_;
};

struct FitResult {
  ModelSpec spec;
  std::vector<std::string> labels;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::MatrixXd covariance;
  double sigma2_participant = 0.0;
  double sigma2_residual = 0.0;
  double theta = 0.0;
  bool boundary = false;  // theta estimated at 0
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  long n_obs = 0;
  int n_groups = 0;
  int n_params = 0;  // fixed coefficients + 2 variance components
  int evaluations = 0;

  long n_fixed() const { return static_cast<long>(beta.size()); }
  double z(Eigen::Index i) const { return beta(i) / se(i); }
  /// Two-sided normal-approximation p value of coefficient i.
  double p_value(Eigen::Index i) const;
  Eigen::Index coefficient(const std::string& label) const;
};

FitResult fit_random_intercept(const ModelSpec& spec, const LongDataset& data);
FitResult fit_random_intercept(const ModelSpec& spec, const Design& design);
/// Estimates with theta held fixed (theta = 0 gives ordinary least squares).
FitResult fit_at_theta(const ModelSpec& spec, const Design& design, double theta);

nlohmann::json to_json(const FitResult& fit);

}  // namespace crutchlab::lmm
