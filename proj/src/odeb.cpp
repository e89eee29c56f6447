#include "eods/odeb.hpp"

#include <cmath>
#include <string>

#include "eods/dist.hpp"
#include "eods/errors.hpp"

namespace eods {

FullResponseSummary FullResponseSummary::from_responses(const VectorRef& responses) {
  if (responses.size() < 3)
    throw DegenerateInput("FullResponseSummary: need at least 3 responses");
  if (!responses.allFinite()) throw DegenerateInput("FullResponseSummary: non-finite response");
  const SampleMoments m = sample_moments(responses);
  FullResponseSummary s{responses.size(), m.mean, m.variance};
  s.validate();
  return s;
}

void FullResponseSummary::validate() const {
  if (n_full < 3) throw DegenerateInput("FullResponseSummary: n_full must be at least 3");
  if (!(var_y > 0.0)) throw DegenerateInput("FullResponseSummary: response variance must be positive");
}

SelectedSubset SelectedSubset::from_xy(const VectorRef& biomarker, const VectorRef& response,
                                       double gamma) {
  SelectedSubset s{PairedSample{response, biomarker}, gamma};
  s.validate();
  return s;
}

void SelectedSubset::validate() const {
  pairs.validate();
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw DomainError("SelectedSubset: gamma must lie in (0, 1]");
}

ForwardParams convert_reverse_to_forward(double beta_x, double alpha_x, double sigma2_eps_x,
                                         double mean_y, double var_y) {
  if (!(var_y > 0.0)) throw DomainError("convert_reverse_to_forward: var_y must be positive");
  if (sigma2_eps_x < 0.0)
    throw DomainError("convert_reverse_to_forward: sigma2_eps_x must be nonnegative");
  // sigma_X^2 = sigma2_eps_x + beta_x^2 sigma_Y^2
  const double denom = sigma2_eps_x + beta_x * beta_x * var_y;
  if (!(denom > 0.0))
    throw DegenerateInput("convert_reverse_to_forward: zero residual variance and zero slope");
  return {beta_x * var_y / denom, (sigma2_eps_x * mean_y - alpha_x * beta_x * var_y) / denom,
          var_y * sigma2_eps_x / denom};
}

double se_beta_y(double beta_x_hat, double se_beta_x, double sigma2_eps_x_hat, double var_y_tilde,
                 std::int64_t n_selected, std::int64_t n_full) {
  if (!(var_y_tilde > 0.0)) throw DomainError("se_beta_y: var_y_tilde must be positive");
  if (n_selected < 3) throw DomainError("se_beta_y: n_selected must be at least 3");
  if (n_full < 2) throw DomainError("se_beta_y: n_full must be at least 2");
  if (se_beta_x < 0.0 || sigma2_eps_x_hat < 0.0)
    throw DomainError("se_beta_y: standard error and residual variance must be nonnegative");

  const double ratio = sigma2_eps_x_hat / var_y_tilde;
  const double b2 = beta_x_hat * beta_x_hat;
  const double base = ratio + b2;
  if (!(base > 0.0)) throw DegenerateInput("se_beta_y: zero residual variance and zero slope");

  const double slope_term = (ratio - b2) * (ratio - b2) * se_beta_x * se_beta_x;
  const double variance_term = 2.0 * b2 * ratio * ratio *
                               (1.0 / static_cast<double>(n_selected - 2) +
                                1.0 / static_cast<double>(n_full - 1));
  const double base2 = base * base;
  return std::sqrt((slope_term + variance_term) / (base2 * base2));
}

AssociationTest test_association(const SelectedSubset& subset) {
  subset.validate();
  const FitResult fit = fit_simple(subset.pairs);
  return {fit.t_stat, fit.p_value};
}

OdebEstimate estimate(const SelectedSubset& subset, const FullResponseSummary& full,
                      double confidence_level) {
  subset.validate();
  full.validate();
  if (!(confidence_level > 0.0 && confidence_level < 1.0))
    throw DomainError("estimate: confidence_level must lie in (0, 1)");
  const std::int64_t n_s = subset.n_selected();
  if (n_s < 4)
    throw InsufficientData("estimate: need at least 4 biomarker-tested subjects, got " +
                           std::to_string(n_s));
  if (n_s > full.n_full)
    throw DomainError("estimate: subset is larger than the full sample");

  OdebEstimate est;
  est.reverse_fit = fit_simple(subset.pairs);
  const FitResult& rev = est.reverse_fit;

  const ForwardParams fwd = convert_reverse_to_forward(rev.slope, rev.intercept,
                                                       rev.residual_variance, full.mean_y, full.var_y);
  est.beta_y = fwd.beta_y;
  est.alpha_y = fwd.alpha_y;
  est.sigma2_eps_y = fwd.sigma2_eps_y;
  est.se_beta_y = se_beta_y(rev.slope, rev.se_slope, rev.residual_variance, full.var_y, n_s,
                            full.n_full);

  est.confidence_level = confidence_level;
  const double t = dist::t_quantile(1.0 - (1.0 - confidence_level) / 2.0,
                                    static_cast<double>(n_s - 2));
  est.ci_low = est.beta_y - t * est.se_beta_y;
  est.ci_high = est.beta_y + t * est.se_beta_y;
  est.p_value = rev.p_value;
  return est;
}

Diagnostics check_model(const SelectedSubset& subset, const VectorRef& full_responses) {
  subset.validate();
  if (full_responses.size() < subset.n_selected())
    throw DegenerateInput("check_model: fewer full responses than selected subjects");
  const FitResult fit = fit_simple(subset.pairs);
  Diagnostics d;
  d.response_qq = qq_points(full_responses);
  d.residual_qq = qq_points(fit.residuals);
  d.response_moments = sample_moments(full_responses);
  d.residual_moments = sample_moments(fit.residuals);
  return d;
}

}  // namespace eods
