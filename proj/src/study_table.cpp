#include "eods/study_table.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "eods/errors.hpp"

namespace eods {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

double parse_number(const std::string& field, bool& ok) {
  std::istringstream in(field);
  in.imbue(std::locale::classic());
  double v = 0.0;
  in >> v;
  ok = !in.fail() && in.eof() && std::isfinite(v);
  return v;
}

}  // namespace

bool is_missing_field(const std::string& field) { return field.empty() || field == "NA"; }

StudyTable StudyTable::parse_csv(const std::string& text, const std::string& source) {
  StudyTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
      line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw SchemaError(source + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(t.header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    t.cells.push_back(std::move(fields));
  }
  if (!have_header) throw SchemaError(source + ": missing header row");
  return t;
}

StudyTable StudyTable::read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

std::size_t StudyTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw SchemaError("missing column '" + name + "'");
}

bool StudyTable::has_column(const std::string& name) const {
  for (const auto& h : header)
    if (h == name) return true;
  return false;
}

Vector StudyTable::required_column(const std::string& name) const {
  const std::size_t c = column_index(name);
  Vector v(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t r = 0; r < cells.size(); ++r) {
    const std::string& f = cells[r][c];
    // data rows are numbered from 1, the header is line 1 of the file
    const std::string where = "row " + std::to_string(r + 1) + " (line " + std::to_string(r + 2) + ")";
    if (is_missing_field(f)) throw SchemaError("column '" + name + "' is missing at " + where);
    bool ok = false;
    v[static_cast<Eigen::Index>(r)] = parse_number(f, ok);
    if (!ok) throw SchemaError("column '" + name + "' is not numeric at " + where + ": '" + f + "'");
  }
  return v;
}

Vector StudyTable::optional_column(const std::string& name) const {
  const std::size_t c = column_index(name);
  Vector v(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t r = 0; r < cells.size(); ++r) {
    const std::string& f = cells[r][c];
    if (is_missing_field(f)) {
      v[static_cast<Eigen::Index>(r)] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    bool ok = false;
    v[static_cast<Eigen::Index>(r)] = parse_number(f, ok);
    if (!ok)
      throw SchemaError("column '" + name + "' is not numeric at row " + std::to_string(r + 1) +
                        " (line " + std::to_string(r + 2) + "): '" + f + "'");
  }
  return v;
}

}  // namespace eods
