#pragma once

// Special functions and the handful of distributions the estimator and the
// power calculations need. All functions are pure.

namespace eods::dist {

struct NoncentralFParams {
  double df1 = 1.0;
  double df2 = 1.0;
  double ncp = 0.0;  ///< noncentrality lambda

  void validate() const;
};

/// Pair of a probability and its complement, each computed without
/// cancellation.
struct TailPair {
  double lower = 0.0;
  double upper = 1.0;
};

double norm_pdf(double x);
double norm_cdf(double x);
/// Upper tail 1 - Phi(x).
double norm_sf(double x);
/// Lower quantile: Phi(x) = p.
double norm_quantile(double p);

/// Regularized incomplete beta I_x(a, b) and 1 - I_x(a, b). `y` must equal
/// 1 - x; callers pass it separately when they can form it exactly.
TailPair incomplete_beta(double a, double b, double x, double y);
double incomplete_beta(double a, double b, double x);

double t_cdf(double x, double df);
/// P(|T| >= |t|).
double t_two_sided_p(double t, double df);
double t_quantile(double p, double df);

double f_cdf_central(double x, double df1, double df2);
double f_sf_central(double x, double df1, double df2);
/// x with P(F > x) = alpha_upper.
double f_quantile_central(double alpha_upper, double df1, double df2);

double f_cdf_noncentral(double x, const NoncentralFParams& params);
double f_sf_noncentral(double x, const NoncentralFParams& params);

/// Integral of x^2 phi(x) over [c, inf).
double truncated_tail_second_moment(double c);

}  // namespace eods::dist
