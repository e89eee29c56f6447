#include "eods/grid_config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "eods/errors.hpp"

namespace eods {
namespace {

using sim::SimScenario;
using Setter = std::function<void(SimScenario&, const std::string&)>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  std::istringstream in(v);
  in.imbue(std::locale::classic());
  double d = 0.0;
  in >> d;
  if (in.fail() || !in.eof() || !std::isfinite(d)) throw DomainError("not a number: '" + v + "'");
  return d;
}

std::int64_t to_int(const std::string& v) {
  const double d = to_double(v);
  if (d != std::floor(d) || std::fabs(d) > 9.0e15) throw DomainError("not an integer: '" + v + "'");
  return static_cast<std::int64_t>(d);
}

std::uint64_t to_seed(const std::string& v) {
  std::size_t used = 0;
  unsigned long long s = 0;
  try {
    s = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || v[0] == '-') throw DomainError("not a seed: '" + v + "'");
  return s;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"n_full", [](SimScenario& s, const std::string& v) { s.n_full = to_int(v); }},
      {"beta_y", [](SimScenario& s, const std::string& v) { s.beta_y = to_double(v); }},
      {"alpha_y", [](SimScenario& s, const std::string& v) { s.alpha_y = to_double(v); }},
      {"noise_variance", [](SimScenario& s, const std::string& v) { s.noise_variance = to_double(v); }},
      {"x_mean", [](SimScenario& s, const std::string& v) { s.x_mean = to_double(v); }},
      {"x_var", [](SimScenario& s, const std::string& v) { s.x_var = to_double(v); }},
      {"residual_family",
       [](SimScenario& s, const std::string& v) { s.residual_family = sim::ResidualFamily::parse(v); }},
      {"gamma", [](SimScenario& s, const std::string& v) { s.gamma = to_double(v); }},
      {"sampling", [](SimScenario& s, const std::string& v) { s.sampling = sim::parse_sampling(v); }},
      {"estimator", [](SimScenario& s, const std::string& v) { s.estimator = sim::parse_estimator(v); }},
      {"replicates", [](SimScenario& s, const std::string& v) { s.replicates = to_int(v); }},
      {"seed", [](SimScenario& s, const std::string& v) { s.seed = to_seed(v); }},
      {"alpha_level", [](SimScenario& s, const std::string& v) { s.alpha_level = to_double(v); }},
  };
  return table;
}

// Expansion order follows the order keys appear in the file; the last key
// varies fastest.
struct Entry {
  std::string key;
  std::vector<std::string> values;
  std::size_t line = 0;
};

}  // namespace

GridConfig GridConfig::parse(const std::string& text, const std::string& source) {
  std::vector<Entry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value[, value...]'");
    const std::string key = trim(line.substr(0, eq));
    if (!setters().count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    for (const Entry& e : entries)
      if (e.key == key)
        throw ConfigError(where + ": key '" + key + "' already set on line " + std::to_string(e.line));
    Entry entry{key, {}, line_no};
    const std::string rhs = line.substr(eq + 1);
    if (trim(rhs).empty()) throw ConfigError(where + ": no values for '" + key + "'");
    for (std::size_t start = 0;;) {
      const auto comma = rhs.find(',', start);
      const std::string v = trim(rhs.substr(start, comma - start));
      if (v.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
      entry.values.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    // validate each value once, so errors carry the line
    for (const std::string& value : entry.values) {
      SimScenario probe;
      try {
        setters().at(key)(probe, value);
      } catch (const Error& e) {
        throw ConfigError(where + ": field '" + key + "': " + e.what());
      }
    }
    entries.push_back(std::move(entry));
  }

  GridConfig cfg;
  std::vector<std::size_t> pos(entries.size(), 0);
  while (true) {
    SimScenario s;
    for (std::size_t k = 0; k < entries.size(); ++k) setters().at(entries[k].key)(s, entries[k].values[pos[k]]);
    try {
      s.validate();
    } catch (const Error& e) {
      throw ConfigError(source + ": scenario #" + std::to_string(cfg.scenarios.size() + 1) +
                        " is invalid: " + e.what());
    }
    cfg.scenarios.push_back(s);
    std::size_t k = entries.size();
    while (k > 0) {
      --k;
      if (++pos[k] < entries[k].values.size()) break;
      pos[k] = 0;
      if (k == 0) return cfg;
    }
    if (entries.empty()) return cfg;
  }
}

GridConfig GridConfig::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

}  // namespace eods
