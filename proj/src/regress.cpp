#include "eods/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eods/dist.hpp"
#include "eods/errors.hpp"

namespace eods {
namespace {

class NeumaierSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

double compensated_sum(const VectorRef& values) {
  NeumaierSum s;
  for (Eigen::Index i = 0; i < values.size(); ++i) s.add(values[i]);
  return s.value();
}

void PairedSample::validate() const {
  if (predictor.size() != response.size())
    throw DegenerateInput("PairedSample: predictor has " + std::to_string(predictor.size()) +
                          " values but response has " + std::to_string(response.size()));
  if (predictor.size() < 3)
    throw DegenerateInput("PairedSample: need at least 3 pairs, got " +
                          std::to_string(predictor.size()));
}

FitResult fit_simple(const PairedSample& sample) {
  return fit_simple(sample.predictor, sample.response);
}

FitResult fit_simple(const VectorRef& x, const VectorRef& y) {
  if (x.size() != y.size()) throw DegenerateInput("fit_simple: length mismatch");
  const Eigen::Index n = x.size();
  if (n < 3) throw DegenerateInput("fit_simple: need at least 3 pairs");
  if (!x.allFinite() || !y.allFinite()) throw DegenerateInput("fit_simple: non-finite input");

  const double nd = static_cast<double>(n);
  const double x_bar = compensated_sum(x) / nd;
  const double y_bar = compensated_sum(y) / nd;

  NeumaierSum sxx, sxy, syy;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dx = x[i] - x_bar;
    const double dy = y[i] - y_bar;
    sxx.add(dx * dx);
    sxy.add(dx * dy);
    syy.add(dy * dy);
  }
  if (!(sxx.value() > 0.0)) throw DegenerateInput("fit_simple: predictor has zero variance");

  FitResult fit;
  fit.df = static_cast<int>(n - 2);
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = y_bar - fit.slope * x_bar;
  fit.residuals = y.array() - fit.intercept - fit.slope * x.array();

  NeumaierSum sse;
  for (Eigen::Index i = 0; i < n; ++i) sse.add(fit.residuals[i] * fit.residuals[i]);
  fit.residual_variance = sse.value() / fit.df;
  fit.se_slope = std::sqrt(fit.residual_variance / sxx.value());
  fit.se_intercept = std::sqrt(fit.residual_variance * (1.0 / nd + x_bar * x_bar / sxx.value()));
  fit.r_squared = syy.value() > 0.0
                      ? std::clamp(sxy.value() * sxy.value() / (sxx.value() * syy.value()), 0.0, 1.0)
                      : 0.0;

  if (fit.se_slope > 0.0) {
    fit.t_stat = fit.slope / fit.se_slope;
    fit.p_value = dist::t_two_sided_p(fit.t_stat, fit.df);
  } else if (fit.slope != 0.0) {
    // exact nonflat line
    fit.t_stat = std::copysign(std::numeric_limits<double>::infinity(), fit.slope);
    fit.p_value = 0.0;
  } else {
    fit.t_stat = 0.0;
    fit.p_value = 1.0;
  }
  return fit;
}

QqSeries qq_points(const VectorRef& values) {
  const Eigen::Index n = values.size();
  if (n < 3) throw DegenerateInput("qq_points: need at least 3 values");
  QqSeries qq;
  qq.ordered = values;
  std::sort(qq.ordered.begin(), qq.ordered.end());
  qq.theoretical.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    qq.theoretical[i] = dist::norm_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return qq;
}

double qq_slope(const QqSeries& qq) { return fit_simple(qq.theoretical, qq.ordered).slope; }

SampleMoments sample_moments(const VectorRef& values) {
  const Eigen::Index n = values.size();
  if (n < 2) throw DegenerateInput("sample_moments: need at least 2 values");
  SampleMoments m;
  m.mean = compensated_sum(values) / static_cast<double>(n);
  NeumaierSum s2, s3, s4;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = values[i] - m.mean;
    const double d2 = d * d;
    s2.add(d2);
    s3.add(d2 * d);
    s4.add(d2 * d2);
  }
  const double nd = static_cast<double>(n);
  m.variance = s2.value() / (nd - 1.0);
  const double m2 = s2.value() / nd;
  if (m2 > 0.0) {
    m.skewness = (s3.value() / nd) / std::pow(m2, 1.5);
    m.excess_kurtosis = (s4.value() / nd) / (m2 * m2) - 3.0;
  }
  return m;
}

}  // namespace eods
