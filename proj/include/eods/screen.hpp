#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eods/odeb.hpp"
#include "eods/types.hpp"

namespace eods {

/// Which subjects to biomarker-test. Indices refer to the input response
/// vector and are sorted ascending.
struct SelectionPlan {
  std::vector<std::int64_t> low_indices;
  std::vector<std::int64_t> high_indices;
  double gamma_effective = 0.0;
  std::optional<std::string> tie_note;

  std::int64_t n_selected() const {
    return static_cast<std::int64_t>(low_indices.size() + high_indices.size());
  }
  /// low and high merged, ascending.
  std::vector<std::int64_t> all_indices() const;
};

/// n_S = round(gamma * n); floor(n_S / 2) from the bottom, the rest from the
/// top. Equal responses at a cut are taken in order of original index.
SelectionPlan select_extremes(const VectorRef& responses, double gamma);

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> bh_adjust(std::span<const double> p_values);

/// One biomarker over all subjects; NaN marks "not tested".
struct BiomarkerColumn {
  std::string id;
  Vector values;
};

struct ScreenRow {
  std::string biomarker_id;
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  double q_value = 1.0;
  int rank = 0;
  std::int64_t n_selected = 0;
  /// Set when estimation failed for this biomarker; numeric fields are NaN.
  std::optional<std::string> error;
};

/// Univariable estimates for each biomarker against `responses` (aligned with
/// the biomarker columns), BH q-values over the successful rows, sorted by
/// p-value then id. Failed biomarkers are flagged and ranked last.
std::vector<ScreenRow> screen_biomarkers(std::span<const BiomarkerColumn> biomarkers,
                                         const VectorRef& responses,
                                         const FullResponseSummary& full,
                                         double confidence_level, bool log10_transform);

}  // namespace eods
