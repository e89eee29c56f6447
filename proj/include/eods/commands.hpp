#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "eods/design.hpp"
#include "eods/odeb.hpp"
#include "eods/screen.hpp"
#include "eods/sim.hpp"

// Command implementations behind the `eods` executable. Each run_* function
// does the work and returns a report; the write_*/print_* helpers render it.

namespace eods::cli {

/// Shortest text for a double that keeps 17 significant digits; NaN -> "NA".
std::string format_number(double v);

struct AnalyzeOptions {
  std::string input;
  std::string response;
  std::string biomarker;
  double confidence = 0.95;
  bool log10 = false;
  std::string out;  ///< JSON report path; diagnostics files go next to it
};

struct AnalyzeReport {
  std::string response;
  std::string biomarker;
  bool log10 = false;
  OdebEstimate estimate;
  std::int64_t n_selected = 0;
  std::int64_t n_full = 0;
  double gamma_effective = 0.0;
  std::vector<std::string> warnings;
  std::vector<std::string> diagnostics_files;
};

AnalyzeReport run_analyze(const AnalyzeOptions& opts);
std::string analyze_report_json(const AnalyzeReport& report);
void print_analyze_summary(const AnalyzeReport& report, std::ostream& out);

struct PlanOptions {
  std::optional<std::int64_t> n_full;
  std::optional<double> gamma;
  std::optional<double> target_power;
  std::optional<double> effect_f;
  std::optional<double> rho;
  double alpha = 0.05;
};

struct PlanReport {
  std::string mode;  ///< "power", "min-gamma" or "min-n-full"
  std::int64_t n_full = 0;
  double gamma = 0.0;
  std::int64_t n_selected = 0;
  double effect_f = 0.0;
  double alpha = 0.05;
  std::optional<double> target_power;
  PowerResult power;
  std::string summary;  ///< one human-readable line
};

PlanReport run_plan(const PlanOptions& opts);
void print_plan(const PlanReport& report, std::ostream& out);

struct ScreenOptions {
  std::string input;
  std::string response;
  std::vector<std::string> biomarkers;  ///< empty: every column except response and id
  std::string id_column = "id";
  double confidence = 0.95;
  double bh_level = 0.05;
  bool log10 = false;
  std::string out;
};

std::vector<ScreenRow> run_screen(const ScreenOptions& opts);
void write_screen_csv(const std::vector<ScreenRow>& rows, double bh_level, std::ostream& out);

struct SimulateOptions {
  std::string config;
  std::string out;
  int workers = 1;
  std::optional<std::uint64_t> seed;  ///< overrides the seed of every grid cell
};

void write_grid_csv(const std::vector<sim::GridRow>& rows, std::ostream& out);
std::vector<sim::GridRow> run_simulate(const SimulateOptions& opts);

struct CheckOptions {
  std::string input;
  std::string response;
  std::string biomarker;
  bool log10 = false;
  std::string out_prefix;  ///< writes <prefix>_response_qq.csv and <prefix>_residual_qq.csv
};

struct CheckReport {
  Diagnostics diagnostics;
  double response_qq_slope = 0.0;
  double residual_qq_slope = 0.0;
  std::vector<std::string> flags;
  std::vector<std::string> files;
};

CheckReport run_check(const CheckOptions& opts);
void print_check(const CheckReport& report, std::ostream& out);

/// Process exit code for an error class (0 never returned).
int exit_code_for(const std::exception& e);

}  // namespace eods::cli
