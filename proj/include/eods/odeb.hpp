#pragma once

#include <cstdint>

#include "eods/regress.hpp"
#include "eods/types.hpp"

// Forward-regression inference from a reverse regression (biomarker on
// response) fitted on an extreme-response subset, plus the mean and variance
// of the fully observed response.

namespace eods {

/// Sufficient statistics of the full response sample.
struct FullResponseSummary {
  std::int64_t n_full = 0;
  double mean_y = 0.0;
  double var_y = 0.0;  ///< divisor n_full - 1

  static FullResponseSummary from_responses(const VectorRef& responses);
  void validate() const;
};

/// Biomarker-tested pairs oriented for the reverse fit: predictor = Y
/// (response), response = X (biomarker).
struct SelectedSubset {
  PairedSample pairs;
  double gamma = 1.0;

  static SelectedSubset from_xy(const VectorRef& biomarker, const VectorRef& response, double gamma);
  std::int64_t n_selected() const { return pairs.size(); }
  void validate() const;
};

struct ForwardParams {
  double beta_y = 0.0;
  double alpha_y = 0.0;
  double sigma2_eps_y = 0.0;
};

ForwardParams convert_reverse_to_forward(double beta_x, double alpha_x, double sigma2_eps_x,
                                         double mean_y, double var_y);

/// Delta-method standard error of the converted slope. The variance of the
/// residual-variance estimate uses n_selected - 2 degrees of freedom and the
/// variance of the response variance uses n_full - 1.
double se_beta_y(double beta_x_hat, double se_beta_x, double sigma2_eps_x_hat, double var_y_tilde,
                 std::int64_t n_selected, std::int64_t n_full);

struct OdebEstimate {
  double beta_y = 0.0;
  /// Point estimate only; no interval is derived for the intercept.
  double alpha_y = 0.0;
  double sigma2_eps_y = 0.0;
  double se_beta_y = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence_level = 0.95;
  double p_value = 1.0;  ///< reverse-regression slope test
  FitResult reverse_fit;
};

OdebEstimate estimate(const SelectedSubset& subset, const FullResponseSummary& full,
                      double confidence_level = 0.95);

struct AssociationTest {
  double t_stat = 0.0;
  double p_value = 1.0;
};

/// Slope test of the reverse regression; beta_Y = 0 iff beta_X = 0.
AssociationTest test_association(const SelectedSubset& subset);

struct Diagnostics {
  QqSeries response_qq;  ///< full responses, normality of Y
  QqSeries residual_qq;  ///< reverse-fit residuals, normality of X given Y
  SampleMoments response_moments;
  SampleMoments residual_moments;
};

Diagnostics check_model(const SelectedSubset& subset, const VectorRef& full_responses);

}  // namespace eods
