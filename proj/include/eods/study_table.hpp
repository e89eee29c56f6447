#pragma once

#include <string>
#include <vector>

#include "eods/types.hpp"

namespace eods {

/// A study CSV: an id column (optional), a fully observed response and
/// biomarker columns where empty or "NA" means not tested.
struct StudyTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;  ///< raw fields, one row per record

  static StudyTable read_csv(const std::string& path);
  static StudyTable parse_csv(const std::string& text, const std::string& source = "<memory>");

  std::size_t column_index(const std::string& name) const;
  bool has_column(const std::string& name) const;

  /// Every row must hold a number; missing values are a SchemaError naming the row.
  Vector required_column(const std::string& name) const;
  /// Missing values become NaN.
  Vector optional_column(const std::string& name) const;

  std::size_t rows() const { return cells.size(); }
};

bool is_missing_field(const std::string& field);

}  // namespace eods
