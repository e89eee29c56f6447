#pragma once

#include "eods/types.hpp"

namespace eods {

/// Observed (predictor, response) pairs. Lengths must match and be >= 3.
struct PairedSample {
  Vector predictor;
  Vector response;

  Eigen::Index size() const { return predictor.size(); }
  void validate() const;
};

/// Least-squares fit of response = intercept + slope * predictor.
struct FitResult {
  double intercept = 0.0;
  double slope = 0.0;
  double se_slope = 0.0;
  double se_intercept = 0.0;
  double residual_variance = 0.0;  ///< SSE / (n - 2)
  int df = 0;
  double r_squared = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;  ///< two-sided, slope = 0
  Vector residuals;
};

FitResult fit_simple(const PairedSample& sample);
FitResult fit_simple(const VectorRef& predictor, const VectorRef& response);

/// Normal probability plot coordinates: theoretical[i] = Phi^{-1}((i + 0.5) / n)
/// against the i-th order statistic.
struct QqSeries {
  Vector theoretical;
  Vector ordered;
};

QqSeries qq_points(const VectorRef& values);

/// Least-squares slope of ordered on theoretical.
double qq_slope(const QqSeries& qq);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  ///< divisor n - 1
  double skewness = 0.0;  ///< g1 = m3 / m2^1.5, 0 for a constant series
  double excess_kurtosis = 0.0;  ///< g2 = m4 / m2^2 - 3, 0 for a constant series
};

SampleMoments sample_moments(const VectorRef& values);

/// Neumaier-compensated sum.
double compensated_sum(const VectorRef& values);

}  // namespace eods
