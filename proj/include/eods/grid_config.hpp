#pragma once

#include <string>
#include <vector>

#include "eods/sim.hpp"

namespace eods {

/// Line-oriented `key = v1, v2, ...` simulation grid. Keys are SimScenario
/// field names; list-valued keys expand as a cross product. `#` starts a
/// comment. Unknown keys and bad values raise ConfigError with the line.
struct GridConfig {
  std::vector<sim::SimScenario> scenarios;

  static GridConfig parse(const std::string& text, const std::string& source = "<memory>");
  static GridConfig read(const std::string& path);
};

}  // namespace eods
