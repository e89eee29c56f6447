#include "eods/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "eods/dist.hpp"
#include "eods/errors.hpp"
#include "eods/odeb.hpp"
#include "eods/regress.hpp"
#include "eods/roots.hpp"
#include "eods/screen.hpp"

namespace eods::sim {

ResidualFamily ResidualFamily::parse(const std::string& raw) {
  std::string text;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) text += c;
  if (text == "normal") return {ResidualKind::normal, 0.0};
  if (text == "shifted_lognormal") return {ResidualKind::shifted_lognormal, 0.0};
  const std::string prefix = "scaled_t(";
  if (text.rfind(prefix, 0) == 0 && text.back() == ')') {
    const std::string inner = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    std::size_t used = 0;
    double df = 0.0;
    try {
      df = std::stod(inner, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == inner.size() && used > 0) return {ResidualKind::scaled_t, df};
  }
  throw DomainError("unknown residual family '" + raw +
                    "' (expected normal, scaled_t(df) or shifted_lognormal)");
}

std::string ResidualFamily::label() const {
  switch (kind) {
    case ResidualKind::normal:
      return "normal";
    case ResidualKind::shifted_lognormal:
      return "shifted_lognormal";
    case ResidualKind::scaled_t: {
      std::string s = std::to_string(df);
      s.erase(s.find_last_not_of('0') + 1);
      if (s.back() == '.') s.pop_back();
      return "scaled_t(" + s + ")";
    }
  }
  return "?";
}

std::string to_string(Sampling s) { return s == Sampling::extreme ? "extreme" : "random"; }
std::string to_string(Estimator e) { return e == Estimator::ols ? "ols" : "odeb"; }

Sampling parse_sampling(const std::string& text) {
  if (text == "extreme") return Sampling::extreme;
  if (text == "random") return Sampling::random;
  throw DomainError("unknown sampling '" + text + "' (expected extreme or random)");
}

Estimator parse_estimator(const std::string& text) {
  if (text == "ols") return Estimator::ols;
  if (text == "odeb") return Estimator::odeb;
  throw DomainError("unknown estimator '" + text + "' (expected ols or odeb)");
}

void SimScenario::validate() const {
  if (n_full < 5) throw DomainError("SimScenario: n_full must be at least 5");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("SimScenario: gamma must lie in (0, 1]");
  if (std::llround(gamma * static_cast<double>(n_full)) < 4)
    throw DomainError("SimScenario: round(gamma * n_full) must be at least 4");
  if (!(noise_variance > 0.0)) throw DomainError("SimScenario: noise_variance must be positive");
  if (!(x_var > 0.0)) throw DomainError("SimScenario: x_var must be positive");
  if (replicates < 1) throw DomainError("SimScenario: replicates must be at least 1");
  if (!(alpha_level > 0.0 && alpha_level < 1.0))
    throw DomainError("SimScenario: alpha_level must lie in (0, 1)");
  if (residual_family.kind == ResidualKind::scaled_t && !(residual_family.df > 2.0))
    throw DomainError("SimScenario: scaled_t needs df > 2");
  if (!std::isfinite(beta_y) || !std::isfinite(alpha_y) || !std::isfinite(x_mean))
    throw DomainError("SimScenario: non-finite parameter");
}

double solve_lognormal_sigma(double variance) {
  if (!(variance > 0.0)) throw DomainError("solve_lognormal_sigma: variance must be positive");
  // variance of LogNormal(0, s^2) is (e^{s^2} - 1) e^{s^2}, increasing in s
  auto g = [variance](double s) {
    const double e = std::exp(s * s);
    return (e - 1.0) * e - variance;
  };
  double hi = 1.0;
  while (g(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 30.0) throw Infeasible("solve_lognormal_sigma: failed to bracket the root");
  }
  return solve_bracketed(g, 0.0, hi, 1e-12);
}

ResidualSampler::ResidualSampler(const ResidualFamily& family, double noise_variance)
    : family_(family) {
  if (!(noise_variance > 0.0)) throw DomainError("ResidualSampler: noise_variance must be positive");
  scale_ = std::sqrt(noise_variance);
  switch (family.kind) {
    case ResidualKind::normal:
      break;
    case ResidualKind::scaled_t:
      if (!(family.df > 2.0)) throw DomainError("ResidualSampler: scaled_t needs df > 2");
      student_ = std::student_t_distribution<double>(family.df);
      break;
    case ResidualKind::shifted_lognormal:
      sigma_ = solve_lognormal_sigma(noise_variance);
      mode_ = std::exp(-sigma_ * sigma_);
      lognormal_ = std::lognormal_distribution<double>(0.0, sigma_);
      break;
  }
}

std::mt19937_64 replicate_engine(std::uint64_t seed, std::int64_t replicate_index,
                                 std::uint32_t stream) {
  const auto rep = static_cast<std::uint64_t>(replicate_index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32), stream};
  return std::mt19937_64(seq);
}

namespace {

constexpr std::uint32_t kDataStream = 0;
constexpr std::uint32_t kRandomSubsetStream = 1;

struct ReplicateOutcome {
  bool ok = false;
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool reject = false;
};

std::vector<std::int64_t> random_subset(std::int64_t n, std::int64_t n_sel, std::uint64_t seed,
                                        std::int64_t replicate) {
  std::vector<std::int64_t> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::int64_t> picked;
  picked.reserve(static_cast<std::size_t>(n_sel));
  auto engine = replicate_engine(seed, replicate, kRandomSubsetStream);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), n_sel, engine);
  return picked;
}

ReplicateOutcome run_replicate(const SimScenario& sc, std::int64_t replicate, double t_crit) {
  const Dataset data = generate_dataset(sc, replicate);
  const std::int64_t n_sel = std::llround(sc.gamma * static_cast<double>(sc.n_full));
  const std::vector<std::int64_t> idx =
      sc.sampling == Sampling::extreme ? select_extremes(data.y, sc.gamma).all_indices()
                                       : random_subset(sc.n_full, n_sel, sc.seed, replicate);

  Vector xs(static_cast<Eigen::Index>(idx.size())), ys(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    xs[static_cast<Eigen::Index>(k)] = data.x[idx[k]];
    ys[static_cast<Eigen::Index>(k)] = data.y[idx[k]];
  }

  ReplicateOutcome out;
  try {
    if (sc.estimator == Estimator::ols) {
      const FitResult fit = fit_simple(xs, ys);
      out.estimate = fit.slope;
      out.se = fit.se_slope;
      out.ci_low = fit.slope - t_crit * fit.se_slope;
      out.ci_high = fit.slope + t_crit * fit.se_slope;
      out.reject = fit.p_value < sc.alpha_level;
    } else {
      const auto full = FullResponseSummary::from_responses(data.y);
      const auto subset = SelectedSubset::from_xy(xs, ys, sc.gamma);
      const OdebEstimate est = estimate(subset, full, 1.0 - sc.alpha_level);
      out.estimate = est.beta_y;
      out.se = est.se_beta_y;
      out.ci_low = est.ci_low;
      out.ci_high = est.ci_high;
      out.reject = est.p_value < sc.alpha_level;
    }
    out.ok = std::isfinite(out.estimate) && std::isfinite(out.se);
  } catch (const DegenerateInput&) {
    out.ok = false;
  } catch (const InsufficientData&) {
    out.ok = false;
  }
  return out;
}

SimMetrics aggregate(const SimScenario& sc, const std::vector<ReplicateOutcome>& outcomes) {
  SimMetrics m;
  std::vector<double> est, err2, abs_err, se, length;
  std::int64_t rejects = 0, covers = 0;
  for (const ReplicateOutcome& o : outcomes) {
    if (!o.ok) {
      ++m.replicates_dropped;
      continue;
    }
    est.push_back(o.estimate);
    const double e = o.estimate - sc.beta_y;
    err2.push_back(e * e);
    abs_err.push_back(std::fabs(e));
    se.push_back(o.se);
    length.push_back(o.ci_high - o.ci_low);
    rejects += o.reject ? 1 : 0;
    covers += (o.ci_low <= sc.beta_y && sc.beta_y <= o.ci_high) ? 1 : 0;
  }
  m.replicates_used = static_cast<std::int64_t>(est.size());
  if (m.replicates_used == 0) throw DegenerateInput("run_scenario: every replicate was degenerate");

  auto mean_of = [](const std::vector<double>& v) {
    return compensated_sum(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()))) /
           static_cast<double>(v.size());
  };
  const double used = static_cast<double>(m.replicates_used);
  m.mean_estimate = mean_of(est);
  m.bias = m.mean_estimate - sc.beta_y;
  m.rmse = std::sqrt(mean_of(err2));
  std::sort(abs_err.begin(), abs_err.end());
  const std::size_t k = abs_err.size();
  m.mae = k % 2 ? abs_err[k / 2] : 0.5 * (abs_err[k / 2 - 1] + abs_err[k / 2]);
  m.rejection_rate = static_cast<double>(rejects) / used;
  m.ci_coverage = static_cast<double>(covers) / used;
  m.mean_ci_length = mean_of(length);
  m.mean_se = mean_of(se);
  if (k > 1) {
    std::vector<double> dev2(est.size());
    for (std::size_t i = 0; i < est.size(); ++i)
      dev2[i] = (est[i] - m.mean_estimate) * (est[i] - m.mean_estimate);
    m.sd_estimate = std::sqrt(mean_of(dev2) * used / (used - 1.0));
  }
  return m;
}

}  // namespace

Dataset generate_dataset(const SimScenario& sc, std::int64_t replicate_index) {
  sc.validate();
  auto engine = replicate_engine(sc.seed, replicate_index, kDataStream);
  std::normal_distribution<double> x_dist(sc.x_mean, std::sqrt(sc.x_var));
  ResidualSampler eps(sc.residual_family, sc.noise_variance);
  Dataset d{Vector(sc.n_full), Vector(sc.n_full)};
  for (Eigen::Index i = 0; i < sc.n_full; ++i) {
    d.x[i] = x_dist(engine);
    d.y[i] = sc.alpha_y + sc.beta_y * d.x[i] + eps(engine);
  }
  return d;
}

SimMetrics run_scenario(const SimScenario& sc, int workers) {
  sc.validate();
  const std::int64_t n_sel = std::llround(sc.gamma * static_cast<double>(sc.n_full));
  const double t_crit = dist::t_quantile(1.0 - sc.alpha_level / 2.0, static_cast<double>(n_sel - 2));

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(sc.replicates));
  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(sc.replicates)));
  if (n_workers == 1) {
    for (std::int64_t r = 0; r < sc.replicates; ++r)
      outcomes[static_cast<std::size_t>(r)] = run_replicate(sc, r, t_crit);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&] {
        for (std::int64_t r = next++; r < sc.replicates; r = next++)
          outcomes[static_cast<std::size_t>(r)] = run_replicate(sc, r, t_crit);
      });
  }
  return aggregate(sc, outcomes);
}

std::vector<GridRow> run_grid(std::span<const SimScenario> scenarios, int workers) {
  if (scenarios.empty()) throw DomainError("run_grid: no scenarios");
  std::vector<GridRow> rows;
  rows.reserve(scenarios.size());
  for (const SimScenario& sc : scenarios) {
    GridRow row{sc, std::nullopt, {}};
    try {
      row.metrics = run_scenario(sc, workers);
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace eods::sim
