#include "eods/screen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "eods/errors.hpp"

namespace eods {

std::vector<std::int64_t> SelectionPlan::all_indices() const {
  std::vector<std::int64_t> all(low_indices);
  all.insert(all.end(), high_indices.begin(), high_indices.end());
  std::sort(all.begin(), all.end());
  return all;
}

SelectionPlan select_extremes(const VectorRef& responses, double gamma) {
  const Eigen::Index n = responses.size();
  if (n < 5) throw DomainError("select_extremes: need at least 5 responses");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("select_extremes: gamma must lie in (0, 1]");
  if (!responses.allFinite()) throw DomainError("select_extremes: non-finite response");
  const std::int64_t n_sel = std::llround(gamma * static_cast<double>(n));
  if (n_sel < 2)
    throw DomainError("select_extremes: gamma selects fewer than 2 subjects");
  const std::int64_t n_low = n_sel / 2;
  const std::int64_t n_high = n_sel - n_low;

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return responses[a] < responses[b]; });

  SelectionPlan plan;
  plan.low_indices.assign(order.begin(), order.begin() + n_low);
  // remaining subjects, largest response first, ties by smaller index
  std::vector<std::int64_t> rest(order.begin() + n_low, order.end());
  std::stable_sort(rest.begin(), rest.end(),
                   [&](auto a, auto b) { return responses[a] > responses[b]; });
  plan.high_indices.assign(rest.begin(), rest.begin() + n_high);

  std::vector<bool> in_low(static_cast<std::size_t>(n), false), in_high(static_cast<std::size_t>(n), false);
  for (auto i : plan.low_indices) in_low[static_cast<std::size_t>(i)] = true;
  for (auto i : plan.high_indices) in_high[static_cast<std::size_t>(i)] = true;

  double low_max = -std::numeric_limits<double>::infinity();
  double high_min = std::numeric_limits<double>::infinity();
  for (auto i : plan.low_indices) low_max = std::max(low_max, responses[i]);
  for (auto i : plan.high_indices) high_min = std::min(high_min, responses[i]);
  bool low_tie = false, high_tie = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!in_low[k] && n_low > 0 && responses[i] == low_max) low_tie = true;
    if (!in_high[k] && n_high > 0 && responses[i] == high_min) high_tie = true;
  }
  if (low_tie || high_tie) {
    std::ostringstream note;
    note << "ties at the ";
    if (low_tie) note << "lower cut (" << low_max << ")";
    if (low_tie && high_tie) note << " and the ";
    if (high_tie) note << "upper cut (" << high_min << ")";
    note << " were broken by original row order";
    plan.tie_note = note.str();
  }

  std::sort(plan.low_indices.begin(), plan.low_indices.end());
  std::sort(plan.high_indices.begin(), plan.high_indices.end());
  plan.gamma_effective = static_cast<double>(n_sel) / static_cast<double>(n);
  return plan;
}

std::vector<double> bh_adjust(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bh_adjust: p-values must lie in [0, 1]");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return p_values[a] < p_values[b]; });

  std::vector<double> q(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const std::size_t i = order[r];
    // m / rank >= 1 before the multiply, so q >= p survives rounding
    running = std::min(running, p_values[i] * (static_cast<double>(m) / static_cast<double>(r + 1)));
    q[i] = running;
  }
  return q;
}

std::vector<ScreenRow> screen_biomarkers(std::span<const BiomarkerColumn> biomarkers,
                                         const VectorRef& responses,
                                         const FullResponseSummary& full,
                                         double confidence_level, bool log10_transform) {
  full.validate();
  std::vector<ScreenRow> rows;
  rows.reserve(biomarkers.size());
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  for (const BiomarkerColumn& col : biomarkers) {
    if (col.values.size() != responses.size())
      throw DomainError("screen_biomarkers: biomarker '" + col.id +
                        "' is not aligned with the responses");
    std::vector<double> xs, ys;
    for (Eigen::Index i = 0; i < col.values.size(); ++i) {
      double v = col.values[i];
      if (std::isnan(v)) continue;
      if (log10_transform) {
        if (!(v > 0.0)) {
          std::ostringstream msg;
          msg << "screen_biomarkers: biomarker '" << col.id << "' has nonpositive value " << v
              << " at data row " << (i + 1) << " under log10 transform";
          throw DomainError(msg.str());
        }
        v = std::log10(v);
      }
      xs.push_back(v);
      ys.push_back(responses[i]);
    }

    ScreenRow row;
    row.biomarker_id = col.id;
    row.n_selected = static_cast<std::int64_t>(xs.size());
    try {
      const Eigen::Map<const Vector> xv(xs.data(), static_cast<Eigen::Index>(xs.size()));
      const Eigen::Map<const Vector> yv(ys.data(), static_cast<Eigen::Index>(ys.size()));
      const double gamma = static_cast<double>(xs.size()) / static_cast<double>(full.n_full);
      const SelectedSubset subset = SelectedSubset::from_xy(xv, yv, std::min(gamma, 1.0));
      const OdebEstimate est = estimate(subset, full, confidence_level);
      row.estimate = est.beta_y;
      row.se = est.se_beta_y;
      row.ci_low = est.ci_low;
      row.ci_high = est.ci_high;
      row.p_value = est.p_value;
    } catch (const DomainError&) {
      throw;
    } catch (const Error& e) {
      row.estimate = row.se = row.ci_low = row.ci_high = row.p_value = row.q_value = kNaN;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }

  std::vector<double> ps;
  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!rows[i].error) {
      ps.push_back(rows[i].p_value);
      ok.push_back(i);
    }
  const std::vector<double> qs = bh_adjust(ps);
  for (std::size_t k = 0; k < ok.size(); ++k) rows[ok[k]].q_value = qs[k];

  std::stable_sort(rows.begin(), rows.end(), [](const ScreenRow& a, const ScreenRow& b) {
    if (a.error.has_value() != b.error.has_value()) return !a.error.has_value();
    if (!a.error && a.p_value != b.p_value) return a.p_value < b.p_value;
    return a.biomarker_id < b.biomarker_id;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = static_cast<int>(i + 1);
  return rows;
}

}  // namespace eods
