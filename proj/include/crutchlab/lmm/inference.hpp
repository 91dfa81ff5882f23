#pragma once

#include <string>
#include <vector>

#include "crutchlab/lmm/fit.hpp"

namespace crutchlab::lmm {

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// AIC = -2 loglik + 2p, BIC = -2 loglik + p ln(n).
InformationCriteria information_criteria(double loglik, int n_params, long n_obs);
InformationCriteria information_criteria(const FitResult& fit);

struct LrtResult {
  double chi2 = 0.0;
  int df = 0;
  double p = 1.0;
};

/// Chi-square upper tail of 2 (loglik_large - loglik_small).
LrtResult likelihood_ratio(double loglik_small, double loglik_large, int df);
/// Nested comparison. Throws InvalidInput when the fixed effects differ and
/// either fit is REML, or when `small` is not nested in `large`.
LrtResult likelihood_ratio_test(const FitResult& small, const FitResult& large);

struct ContrastResult {
  std::string label;  // "Rigid - Spring"
  Device first = Device::Rigid;
  Device second = Device::Rigid;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p = 1.0;           // unadjusted, two-sided normal
  double p_adjusted = 1.0;  // Holm over the family
};

/// first - second at the covariate origin (Block = Trial = Turning = 0).
ContrastResult device_contrast(const FitResult& fit, Device first, Device second);
/// All level pairs in level order, Holm-adjusted.
std::vector<ContrastResult> pairwise_contrasts(const FitResult& fit, Term factor = Term::Device);

/// Holm step-down adjustment; order of the input is preserved.
std::vector<double> holm_adjust(const std::vector<double>& p);

struct EffectSize {
  double value = 0.0;
  double wald = 0.0;  // F * df_num
  int df_num = 0;
  long df_den = 0;
  std::string formula;
};

/// Partial eta squared from the Wald F of the term's coefficients,
/// F df1 / (F df1 + df2) with df2 = n_obs - n_fixed.
EffectSize partial_eta_squared(const FitResult& fit, Term term);

}  // namespace crutchlab::lmm
