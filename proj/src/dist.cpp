#include "eods/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "eods/errors.hpp"
#include "eods/roots.hpp"

namespace eods::dist {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;

// Continued fraction for I_x(a,b), modified Lentz. Converges fast for
// x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 200000;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw DomainError("incomplete_beta: continued fraction did not converge (a=" +
                    std::to_string(a) + ", b=" + std::to_string(b) + ")");
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

void require_positive_df(double df, const char* who) {
  if (!(df > 0.0) || !std::isfinite(df))
    throw DomainError(std::string(who) + ": degrees of freedom must be positive");
}

void require_probability(double p, const char* who) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError(std::string(who) + ": probability must lie in (0, 1)");
}

// Argument of the incomplete beta for the F distribution, with its complement
// formed without subtraction.
TailPair f_beta_args(double x, double df1, double df2) {
  const double num = df1 * x;
  const double den = num + df2;
  return {num / den, df2 / den};
}

}  // namespace

void NoncentralFParams::validate() const {
  if (!(df1 > 0.0) || !(df2 > 0.0) || !(ncp >= 0.0) || !std::isfinite(ncp))
    throw DomainError("NoncentralFParams: require df1 > 0, df2 > 0, ncp >= 0");
}

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double norm_sf(double x) { return 0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0); }

double norm_quantile(double p) {
  require_probability(p, "norm_quantile");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -norm_quantile(1.0 - p);
  // p < 0.5: root lies in (-40, 0]
  return solve_bracketed([p](double x) { return norm_cdf(x) - p; }, -40.0, 0.0, 1e-15);
}

TailPair incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError("incomplete_beta: shape parameters must be positive");
  if (x <= 0.0) return {0.0, 1.0};
  if (y <= 0.0) return {1.0, 0.0};

  const double log_front = a * std::log(x) + b * std::log(y) - log_beta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double lower = front * beta_continued_fraction(a, b, x) / a;
    return {lower, 1.0 - lower};
  }
  const double upper = front * beta_continued_fraction(b, a, y) / b;
  return {1.0 - upper, upper};
}

double incomplete_beta(double a, double b, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x must lie in [0, 1]");
  return incomplete_beta(a, b, x, 1.0 - x).lower;
}

double t_two_sided_p(double t, double df) {
  require_positive_df(df, "t_two_sided_p");
  if (std::isnan(t)) throw DomainError("t_two_sided_p: t is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  return incomplete_beta(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2)).lower;
}

double t_cdf(double x, double df) {
  require_positive_df(df, "t_cdf");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * t_two_sided_p(x, df);
  return x > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double p, double df) {
  require_probability(p, "t_quantile");
  require_positive_df(df, "t_quantile");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -t_quantile(1.0 - p, df);
  // solve on the upper tail to keep precision near p = 1
  const double tail = 1.0 - p;
  auto g = [&](double x) { return 0.5 * t_two_sided_p(x, df) - tail; };
  double hi = 2.0;
  while (g(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw DomainError("t_quantile: failed to bracket");
  }
  return solve_bracketed(g, 0.0, hi, 1e-14 * std::max(1.0, hi));
}

double f_cdf_central(double x, double df1, double df2) {
  require_positive_df(df1, "f_cdf_central");
  require_positive_df(df2, "f_cdf_central");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const TailPair arg = f_beta_args(x, df1, df2);
  return incomplete_beta(0.5 * df1, 0.5 * df2, arg.lower, arg.upper).lower;
}

double f_sf_central(double x, double df1, double df2) {
  require_positive_df(df1, "f_sf_central");
  require_positive_df(df2, "f_sf_central");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const TailPair arg = f_beta_args(x, df1, df2);
  return incomplete_beta(0.5 * df1, 0.5 * df2, arg.lower, arg.upper).upper;
}

double f_quantile_central(double alpha_upper, double df1, double df2) {
  require_probability(alpha_upper, "f_quantile_central");
  require_positive_df(df1, "f_quantile_central");
  require_positive_df(df2, "f_quantile_central");
  auto g = [&](double x) { return f_sf_central(x, df1, df2) - alpha_upper; };
  double hi = 1.0;
  while (g(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw DomainError("f_quantile_central: failed to bracket");
  }
  return solve_bracketed(g, 0.0, hi, 1e-14 * std::max(1.0, hi));
}

namespace {

// Sum over the Poisson(lambda/2) mixture of incomplete beta terms. `upper`
// selects the survival function. The series starts at the Poisson mode and
// walks outward; each direction stops when a geometric bound on the
// remaining Poisson mass drops below half the 1e-12 budget.
double noncentral_f_series(double x, const NoncentralFParams& p, bool upper) {
  p.validate();
  if (x <= 0.0) return upper ? 1.0 : 0.0;
  if (std::isinf(x)) return upper ? 0.0 : 1.0;

  const TailPair arg = f_beta_args(x, p.df1, p.df2);
  const double a0 = 0.5 * p.df1;
  const double b = 0.5 * p.df2;
  auto term = [&](double j) {
    const TailPair ib = incomplete_beta(a0 + j, b, arg.lower, arg.upper);
    return upper ? ib.upper : ib.lower;
  };

  const double mu = 0.5 * p.ncp;
  if (mu == 0.0) return term(0.0);

  constexpr double kHalfBudget = 0.5e-12;
  const double mode = std::floor(mu);
  const double w_mode = std::exp(-mu + mode * std::log(mu) - std::lgamma(mode + 1.0));

  double sum = w_mode * term(mode);
  double comp = 0.0;  // Neumaier compensation
  auto add = [&](double v) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  };

  // upward
  double w = w_mode;
  for (double j = mode + 1.0;; j += 1.0) {
    w *= mu / j;
    add(w * term(j));
    const double ratio = mu / (j + 1.0);
    const double next = w * ratio;
    if (ratio < 1.0 && next / (1.0 - ratio) < kHalfBudget) break;
    if (w == 0.0) break;
  }
  // downward
  w = w_mode;
  for (double j = mode - 1.0; j >= 0.0; j -= 1.0) {
    w *= (j + 1.0) / mu;
    add(w * term(j));
    if (j == 0.0) break;
    const double ratio = j / mu;
    const double next = w * ratio;
    if (ratio < 1.0 && next / (1.0 - ratio) < kHalfBudget) break;
  }
  return std::clamp(sum + comp, 0.0, 1.0);
}

}  // namespace

double f_cdf_noncentral(double x, const NoncentralFParams& params) {
  return noncentral_f_series(x, params, false);
}

double f_sf_noncentral(double x, const NoncentralFParams& params) {
  return noncentral_f_series(x, params, true);
}

double truncated_tail_second_moment(double c) {
  if (std::isnan(c)) throw DomainError("truncated_tail_second_moment: c is NaN");
  if (c <= -40.0) return 1.0;
  if (c >= 40.0) return 0.0;
  // Integration by parts: int_c^inf x^2 phi(x) dx = c phi(c) + (1 - Phi(c)),
  // since (x phi(x))' = phi(x) - x^2 phi(x).
  return c * norm_pdf(c) + norm_sf(c);
}

}  // namespace eods::dist
