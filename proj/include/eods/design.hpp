#pragma once

#include <cstdint>

// Power and sample size for extreme-response designs and for the ordinary
// full-sample slope test. Both reduce to an upper-tail probability of a
// noncentral F(1, df2) at the central F critical value.

namespace eods {

struct DesignSpec {
  std::int64_t n_full = 0;
  double gamma = 1.0;  ///< fraction selected, split evenly between the tails
  double effect_f = 0.0;  ///< Cohen's f
  double alpha = 0.05;

  /// round(gamma * n_full), halves rounded away from zero.
  std::int64_t n_selected() const;
  void validate() const;
};

struct PowerResult {
  double power = 0.0;
  double ncp = 0.0;
  int df1 = 1;
  std::int64_t df2 = 0;
  double variance_inflation = 1.0;
};

/// f^2 = rho^2 / (1 - rho^2).
double cohen_f2(double rho);

/// Variance of the two-tail-selected standard normal relative to the full
/// variance: 2 / gamma * int_{z}^{inf} x^2 phi(x) dx, z = Phi^{-1}(1 - gamma/2).
double variance_inflation(double gamma);

double power_full(std::int64_t n, double effect_f, double alpha);

PowerResult power_eods(const DesignSpec& spec);

struct GammaPlan {
  double gamma = 1.0;
  std::int64_t n_selected = 0;
  double achieved_power = 0.0;
};

/// Smallest even selection (half per tail) reaching target_power. Falls back
/// to full sampling when n_full is odd and only gamma = 1 suffices.
GammaPlan min_gamma_for_power(std::int64_t n_full, double effect_f, double alpha,
                              double target_power);

/// Smallest n_full (<= 10^7) reaching target_power at fixed gamma.
std::int64_t min_nfull_for_power(double gamma, double effect_f, double alpha, double target_power);

}  // namespace eods
