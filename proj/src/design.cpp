#include "eods/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eods/dist.hpp"
#include "eods/errors.hpp"

namespace eods {
namespace {

constexpr std::int64_t kMaxFull = 10'000'000;

void require_alpha(double alpha, const char* who) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError(std::string(who) + ": alpha must lie in (0, 1)");
}

void require_effect(double effect_f, const char* who) {
  if (!(effect_f >= 0.0) || !std::isfinite(effect_f))
    throw DomainError(std::string(who) + ": effect size must be finite and nonnegative");
}

double upper_tail_power(double ncp, double df2, double alpha) {
  const double critical = dist::f_quantile_central(alpha, 1.0, df2);
  return dist::f_sf_noncentral(critical, {1.0, df2, ncp});
}

// Smallest n_full whose rounded selection is at least 3 subjects.
std::int64_t smallest_valid_full(double gamma) {
  const double guess = std::floor(2.5 / gamma) - 1.0;
  if (guess > static_cast<double>(kMaxFull)) return kMaxFull + 1;
  std::int64_t n = std::max<std::int64_t>(5, static_cast<std::int64_t>(guess));
  while (std::llround(gamma * static_cast<double>(n)) < 3) ++n;
  return n;
}

}  // namespace

std::int64_t DesignSpec::n_selected() const {
  return std::llround(gamma * static_cast<double>(n_full));
}

void DesignSpec::validate() const {
  if (n_full < 5) throw DomainError("DesignSpec: n_full must be at least 5");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("DesignSpec: gamma must lie in (0, 1]");
  if (n_selected() < 3)
    throw DomainError("DesignSpec: round(gamma * n_full) must be at least 3");
  require_alpha(alpha, "DesignSpec");
  require_effect(effect_f, "DesignSpec");
}

double cohen_f2(double rho) {
  if (!(std::fabs(rho) < 1.0)) throw DomainError("cohen_f2: |rho| must be below 1");
  const double r2 = rho * rho;
  return r2 / (1.0 - r2);
}

double variance_inflation(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw DomainError("variance_inflation: gamma must lie in (0, 1]");
  if (gamma == 1.0) return 1.0;
  const double z = -dist::norm_quantile(0.5 * gamma);
  // 2 * (z phi(z) + gamma/2) / gamma
  return (2.0 * z * dist::norm_pdf(z) + gamma) / gamma;
}

double power_full(std::int64_t n, double effect_f, double alpha) {
  if (n < 4) throw DomainError("power_full: n must be at least 4");
  require_alpha(alpha, "power_full");
  require_effect(effect_f, "power_full");
  const double nd = static_cast<double>(n);
  return upper_tail_power(nd * effect_f * effect_f, nd - 2.0, alpha);
}

PowerResult power_eods(const DesignSpec& spec) {
  spec.validate();
  PowerResult r;
  r.df2 = spec.n_selected() - 2;
  if (r.df2 < 1) throw DomainError("power_eods: df2 must be at least 1");
  r.variance_inflation = variance_inflation(spec.gamma);
  r.ncp = static_cast<double>(spec.n_full) * spec.effect_f * spec.effect_f * spec.gamma *
          r.variance_inflation;
  r.power = upper_tail_power(r.ncp, static_cast<double>(r.df2), spec.alpha);
  return r;
}

GammaPlan min_gamma_for_power(std::int64_t n_full, double effect_f, double alpha,
                              double target_power) {
  require_alpha(alpha, "min_gamma_for_power");
  if (!(target_power > alpha && target_power < 1.0))
    throw DomainError("min_gamma_for_power: target_power must lie in (alpha, 1)");
  const DesignSpec full_spec{n_full, 1.0, effect_f, alpha};
  const double full_power = power_eods(full_spec).power;
  if (full_power < target_power)
    throw Infeasible("min_gamma_for_power: even testing all " + std::to_string(n_full) +
                     " subjects gives power " + std::to_string(full_power) + " < " +
                     std::to_string(target_power));

  const double nd = static_cast<double>(n_full);
  for (std::int64_t n_sel = 4; n_sel <= n_full; n_sel += 2) {
    const double gamma = static_cast<double>(n_sel) / nd;
    const double power = power_eods({n_full, gamma, effect_f, alpha}).power;
    if (power >= target_power) return {gamma, n_sel, power};
  }
  return {1.0, n_full, full_power};
}

std::int64_t min_nfull_for_power(double gamma, double effect_f, double alpha,
                                 double target_power) {
  require_alpha(alpha, "min_nfull_for_power");
  if (!(target_power > alpha && target_power < 1.0))
    throw DomainError("min_nfull_for_power: target_power must lie in (alpha, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw DomainError("min_nfull_for_power: gamma must lie in (0, 1]");
  auto reaches = [&](std::int64_t n) {
    return power_eods({n, gamma, effect_f, alpha}).power >= target_power;
  };

  std::int64_t lo = smallest_valid_full(gamma);
  if (lo > kMaxFull)
    throw Infeasible("min_nfull_for_power: gamma too small for any n_full up to 10^7");
  if (reaches(lo)) return lo;

  // exponential bracket, then bisection; power is nondecreasing in n_full
  std::int64_t hi = lo;
  while (true) {
    if (hi == kMaxFull)
      throw Infeasible("min_nfull_for_power: no n_full up to 10^7 reaches the target power");
    hi = std::min(hi * 2, kMaxFull);
    if (reaches(hi)) break;
    lo = hi;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (reaches(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace eods
