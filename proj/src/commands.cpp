#include "eods/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "eods/errors.hpp"
#include "eods/grid_config.hpp"
#include "eods/regress.hpp"
#include "eods/study_table.hpp"

namespace eods::cli {
namespace {

struct StudyData {
  Vector responses;
  Vector biomarker;  ///< NaN where not tested
};

StudyData load_study(const std::string& input, const std::string& response,
                     const std::string& biomarker, bool log10) {
  const StudyTable table = StudyTable::read_csv(input);
  StudyData d{table.required_column(response), table.optional_column(biomarker)};
  if (log10) {
    for (Eigen::Index i = 0; i < d.biomarker.size(); ++i) {
      const double v = d.biomarker[i];
      if (std::isnan(v)) continue;
      if (!(v > 0.0))
        throw DomainError("biomarker '" + biomarker + "' has nonpositive value " + format_number(v) +
                          " at row " + std::to_string(i + 1) + " under --log10");
      d.biomarker[i] = std::log10(v);
    }
  }
  return d;
}

struct Split {
  Vector x;
  Vector y;
  double untested_min = std::numeric_limits<double>::infinity();
  double untested_max = -std::numeric_limits<double>::infinity();
};

Split tested_rows(const StudyData& d) {
  std::vector<double> xs, ys;
  Split s;
  for (Eigen::Index i = 0; i < d.responses.size(); ++i) {
    if (std::isnan(d.biomarker[i])) {
      s.untested_min = std::min(s.untested_min, d.responses[i]);
      s.untested_max = std::max(s.untested_max, d.responses[i]);
      continue;
    }
    xs.push_back(d.biomarker[i]);
    ys.push_back(d.responses[i]);
  }
  s.x = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  s.y = Eigen::Map<const Vector>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  return s;
}

std::string stem_of(const std::string& path) {
  const std::filesystem::path p(path);
  return (p.parent_path() / p.stem()).string();
}

void write_qq_csv(const QqSeries& qq, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << "theoretical_quantile,ordered_value\n";
  for (Eigen::Index i = 0; i < qq.theoretical.size(); ++i)
    out << format_number(qq.theoretical[i]) << ',' << format_number(qq.ordered[i]) << '\n';
}

// Human-facing echo of a parameter; the CSV/JSON outputs keep 17 digits.
std::string short_number(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(10) << v;
  return s.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << text;
}

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(17) << v;
  return s.str();
}

AnalyzeReport run_analyze(const AnalyzeOptions& opts) {
  const StudyData data = load_study(opts.input, opts.response, opts.biomarker, opts.log10);
  const Split split = tested_rows(data);
  if (split.x.size() < 4)
    throw InsufficientData("only " + std::to_string(split.x.size()) + " rows have biomarker '" +
                           opts.biomarker + "'; at least 4 are needed");

  AnalyzeReport r;
  r.response = opts.response;
  r.biomarker = opts.biomarker;
  r.log10 = opts.log10;
  r.n_full = data.responses.size();
  r.n_selected = split.x.size();
  r.gamma_effective = static_cast<double>(r.n_selected) / static_cast<double>(r.n_full);

  const auto full = FullResponseSummary::from_responses(data.responses);
  const auto subset = SelectedSubset::from_xy(split.x, split.y, r.gamma_effective);
  r.estimate = estimate(subset, full, opts.confidence);

  std::int64_t inside = 0;
  for (Eigen::Index i = 0; i < split.y.size(); ++i)
    if (split.y[i] > split.untested_min && split.y[i] < split.untested_max) ++inside;
  if (inside > 0)
    r.warnings.push_back(std::to_string(inside) +
                         " biomarker-tested row(s) lie strictly inside the range of untested "
                         "responses; the subset is not an extreme-response sample");

  if (!opts.out.empty()) {
    const Diagnostics diag = check_model(subset, data.responses);
    const std::string stem = stem_of(opts.out);
    r.diagnostics_files = {stem + ".response_qq.csv", stem + ".residual_qq.csv"};
    write_qq_csv(diag.response_qq, r.diagnostics_files[0]);
    write_qq_csv(diag.residual_qq, r.diagnostics_files[1]);
    write_text(opts.out, analyze_report_json(r));
  }
  return r;
}

std::string analyze_report_json(const AnalyzeReport& r) {
  nlohmann::ordered_json j;
  j["response"] = r.response;
  j["biomarker"] = r.biomarker;
  j["log10"] = r.log10;
  j["beta_y"] = number_or_null(r.estimate.beta_y);
  j["alpha_y"] = number_or_null(r.estimate.alpha_y);
  j["sigma2_eps_y"] = number_or_null(r.estimate.sigma2_eps_y);
  j["se"] = number_or_null(r.estimate.se_beta_y);
  j["ci"] = {number_or_null(r.estimate.ci_low), number_or_null(r.estimate.ci_high)};
  j["confidence_level"] = r.estimate.confidence_level;
  j["p_value"] = number_or_null(r.estimate.p_value);
  j["reverse_fit"] = {{"intercept", r.estimate.reverse_fit.intercept},
                      {"slope", r.estimate.reverse_fit.slope},
                      {"se_slope", r.estimate.reverse_fit.se_slope},
                      {"residual_variance", r.estimate.reverse_fit.residual_variance},
                      {"t_stat", number_or_null(r.estimate.reverse_fit.t_stat)},
                      {"df", r.estimate.reverse_fit.df}};
  j["n_S"] = r.n_selected;
  j["n_F"] = r.n_full;
  j["gamma_effective"] = r.gamma_effective;
  j["warnings"] = r.warnings;
  std::vector<std::string> files;
  for (const auto& f : r.diagnostics_files) files.push_back(std::filesystem::path(f).filename().string());
  j["diagnostics_files"] = files;
  return j.dump(2) + "\n";
}

void print_analyze_summary(const AnalyzeReport& r, std::ostream& out) {
  const OdebEstimate& e = r.estimate;
  out << "response " << r.response << ", biomarker " << r.biomarker << (r.log10 ? " (log10)" : "")
      << "\n";
  out << "n_F = " << r.n_full << ", n_S = " << r.n_selected << ", gamma = " << std::setprecision(4)
      << r.gamma_effective << "\n";
  out << std::fixed << std::setprecision(4);
  out << "beta_Y = " << e.beta_y << "  se = " << e.se_beta_y << "  "
      << std::setprecision(0) << e.confidence_level * 100 << std::setprecision(4) << "% CI ["
      << e.ci_low << ", " << e.ci_high << "]\n";
  out << "alpha_Y = " << e.alpha_y << " (point estimate)  sigma2_eps_Y = " << e.sigma2_eps_y << "\n";
  out << "p-value = " << std::defaultfloat << std::setprecision(4) << e.p_value << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  for (const auto& f : r.diagnostics_files) out << "diagnostics: " << f << "\n";
}

PlanReport run_plan(const PlanOptions& o) {
  if (o.effect_f && o.rho) throw DomainError("plan: give either --effect-f or --rho, not both");
  if (!o.effect_f && !o.rho) throw DomainError("plan: an effect size (--effect-f or --rho) is required");
  PlanReport r;
  r.effect_f = o.effect_f ? *o.effect_f : std::sqrt(cohen_f2(*o.rho));
  r.alpha = o.alpha;
  r.target_power = o.target_power;

  std::ostringstream line;
  line << std::fixed;
  if (o.n_full && o.gamma) {
    r.mode = "power";
    r.n_full = *o.n_full;
    r.gamma = *o.gamma;
  } else if (o.n_full && o.target_power) {
    r.mode = "min-gamma";
    const GammaPlan g = min_gamma_for_power(*o.n_full, r.effect_f, o.alpha, *o.target_power);
    r.n_full = *o.n_full;
    r.gamma = g.gamma;
  } else if (o.gamma && o.target_power) {
    r.mode = "min-n-full";
    r.gamma = *o.gamma;
    r.n_full = min_nfull_for_power(*o.gamma, r.effect_f, o.alpha, *o.target_power);
  } else {
    throw DomainError("plan: give two of --n-full, --gamma, --target-power");
  }
  const DesignSpec spec{r.n_full, r.gamma, r.effect_f, o.alpha};
  r.power = power_eods(spec);
  r.n_selected = spec.n_selected();
  const std::int64_t low = r.n_selected / 2;
  line << "select " << r.n_selected << " (" << low;
  if (r.n_selected - low != low) line << " low + " << r.n_selected - low << " high";
  else line << " per tail";
  line << ") of n_F " << r.n_full << ", power " << std::setprecision(4) << r.power.power;
  r.summary = line.str();
  return r;
}

void print_plan(const PlanReport& r, std::ostream& out) {
  out << "mode: " << r.mode << "\n";
  out << "n_full = " << r.n_full << ", gamma = " << short_number(r.gamma)
      << ", effect_f = " << short_number(r.effect_f) << ", alpha = " << short_number(r.alpha);
  if (r.target_power) out << ", target_power = " << short_number(*r.target_power);
  out << "\n";
  out << "df1 = " << r.power.df1 << ", df2 = " << r.power.df2 << ", ncp = " << short_number(r.power.ncp)
      << ", variance_inflation = " << short_number(r.power.variance_inflation)
      << ", power = " << short_number(r.power.power) << "\n";
  out << r.summary << "\n";
}

std::vector<ScreenRow> run_screen(const ScreenOptions& opts) {
  const StudyTable table = StudyTable::read_csv(opts.input);
  const Vector responses = table.required_column(opts.response);
  std::vector<std::string> names = opts.biomarkers;
  if (names.empty())
    for (const auto& h : table.header)
      if (h != opts.response && h != opts.id_column) names.push_back(h);
  if (names.empty()) throw SchemaError("no biomarker columns in '" + opts.input + "'");

  std::vector<BiomarkerColumn> cols;
  for (const auto& name : names) cols.push_back({name, table.optional_column(name)});
  const auto full = FullResponseSummary::from_responses(responses);
  auto rows = screen_biomarkers(cols, responses, full, opts.confidence, opts.log10);
  if (!opts.out.empty()) {
    std::ofstream out(opts.out);
    if (!out) throw FileError("cannot write '" + opts.out + "'");
    write_screen_csv(rows, opts.bh_level, out);
  }
  return rows;
}

void write_screen_csv(const std::vector<ScreenRow>& rows, double bh_level, std::ostream& out) {
  out << "Biomarker,Estimate,Std. Error,LCL,UCL,P-Value,Q-Value,Rank,n_S,BH_Discovery,Error\n";
  for (const ScreenRow& r : rows) {
    const bool discovery = !r.error && r.q_value <= bh_level;
    out << r.biomarker_id << ',' << format_number(r.estimate) << ',' << format_number(r.se) << ','
        << format_number(r.ci_low) << ',' << format_number(r.ci_high) << ','
        << format_number(r.p_value) << ',' << format_number(r.q_value) << ',' << r.rank << ','
        << r.n_selected << ',' << (discovery ? "yes" : "no") << ',';
    if (r.error) {
      std::string msg = *r.error;
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      out << msg;
    }
    out << '\n';
  }
}

void write_grid_csv(const std::vector<sim::GridRow>& rows, std::ostream& out) {
  out << "n_full,beta_y,alpha_y,noise_variance,x_mean,x_var,residual_family,gamma,sampling,"
         "estimator,replicates,seed,alpha_level,mean_estimate,bias,rmse,mae,rejection_rate,"
         "ci_coverage,mean_ci_length,sd_estimate,mean_se,replicates_used,replicates_dropped,error\n";
  for (const sim::GridRow& row : rows) {
    const sim::SimScenario& s = row.scenario;
    out << s.n_full << ',' << format_number(s.beta_y) << ',' << format_number(s.alpha_y) << ','
        << format_number(s.noise_variance) << ',' << format_number(s.x_mean) << ','
        << format_number(s.x_var) << ',' << s.residual_family.label() << ','
        << format_number(s.gamma) << ',' << sim::to_string(s.sampling) << ','
        << sim::to_string(s.estimator) << ',' << s.replicates << ',' << s.seed << ','
        << format_number(s.alpha_level) << ',';
    if (row.metrics) {
      const sim::SimMetrics& m = *row.metrics;
      out << format_number(m.mean_estimate) << ',' << format_number(m.bias) << ','
          << format_number(m.rmse) << ',' << format_number(m.mae) << ','
          << format_number(m.rejection_rate) << ',' << format_number(m.ci_coverage) << ','
          << format_number(m.mean_ci_length) << ',' << format_number(m.sd_estimate) << ','
          << format_number(m.mean_se) << ',' << m.replicates_used << ',' << m.replicates_dropped
          << ',';
    } else {
      out << "NA,NA,NA,NA,NA,NA,NA,NA,NA,0,0,";
      std::string msg = row.error;
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      out << msg;
    }
    out << '\n';
  }
}

std::vector<sim::GridRow> run_simulate(const SimulateOptions& opts) {
  GridConfig cfg = GridConfig::read(opts.config);
  if (opts.seed)
    for (auto& sc : cfg.scenarios) sc.seed = *opts.seed;
  auto rows = sim::run_grid(cfg.scenarios, opts.workers);
  if (!opts.out.empty()) {
    std::ofstream out(opts.out);
    if (!out) throw FileError("cannot write '" + opts.out + "'");
    write_grid_csv(rows, out);
  }
  return rows;
}

CheckReport run_check(const CheckOptions& opts) {
  const StudyData data = load_study(opts.input, opts.response, opts.biomarker, opts.log10);
  const Split split = tested_rows(data);
  if (split.x.size() < 3)
    throw DegenerateInput("only " + std::to_string(split.x.size()) + " rows have biomarker '" +
                          opts.biomarker + "'; at least 3 are needed");
  const double gamma = static_cast<double>(split.x.size()) / static_cast<double>(data.responses.size());
  const auto subset = SelectedSubset::from_xy(split.x, split.y, gamma);

  CheckReport r;
  r.diagnostics = check_model(subset, data.responses);
  r.response_qq_slope = qq_slope(r.diagnostics.response_qq);
  // all-zero residuals (exact fit) have no slope to report
  r.residual_qq_slope = r.diagnostics.residual_qq.ordered.cwiseAbs().maxCoeff() > 0.0
                            ? qq_slope(r.diagnostics.residual_qq)
                            : 0.0;
  auto flag = [&](const char* what, const SampleMoments& m) {
    if (std::fabs(m.skewness) > 0.5)
      r.flags.push_back(std::string(what) + ": |skewness| = " + format_number(std::fabs(m.skewness)) +
                        " exceeds 0.5");
    if (std::fabs(m.excess_kurtosis) > 1.0)
      r.flags.push_back(std::string(what) + ": |excess kurtosis| = " +
                        format_number(std::fabs(m.excess_kurtosis)) + " exceeds 1");
  };
  flag("response (A)", r.diagnostics.response_moments);
  flag("reverse residuals (B)", r.diagnostics.residual_moments);

  if (!opts.out_prefix.empty()) {
    r.files = {opts.out_prefix + "_response_qq.csv", opts.out_prefix + "_residual_qq.csv"};
    write_qq_csv(r.diagnostics.response_qq, r.files[0]);
    write_qq_csv(r.diagnostics.residual_qq, r.files[1]);
  }
  return r;
}

void print_check(const CheckReport& r, std::ostream& out) {
  const auto& a = r.diagnostics.response_moments;
  const auto& b = r.diagnostics.residual_moments;
  out << "(A) response: n = " << r.diagnostics.response_qq.ordered.size()
      << ", skewness = " << format_number(a.skewness)
      << ", excess_kurtosis = " << format_number(a.excess_kurtosis)
      << ", qq_slope = " << format_number(r.response_qq_slope) << "\n";
  out << "(B) reverse residuals: n = " << r.diagnostics.residual_qq.ordered.size()
      << ", skewness = " << format_number(b.skewness)
      << ", excess_kurtosis = " << format_number(b.excess_kurtosis)
      << ", qq_slope = " << format_number(r.residual_qq_slope) << "\n";
  for (const auto& f : r.flags) out << "flag: " << f << "\n";
  for (const auto& f : r.files) out << "wrote " << f << "\n";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const FileError*>(&e)) return 3;
  if (dynamic_cast<const SchemaError*>(&e)) return 4;
  if (dynamic_cast<const ConfigError*>(&e)) return 5;
  if (dynamic_cast<const DegenerateInput*>(&e) || dynamic_cast<const InsufficientData*>(&e)) return 6;
  if (dynamic_cast<const Infeasible*>(&e)) return 7;
  if (dynamic_cast<const DomainError*>(&e)) return 8;
  return 1;
}

}  // namespace eods::cli
