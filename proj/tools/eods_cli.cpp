// eods: plan and analyze extreme outcome-dependent biomarker studies.

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "eods/commands.hpp"

namespace {

template <class T>
std::optional<T> opt_if(const CLI::Option* o, const T& v) {
  return o->count() ? std::optional<T>(v) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme outcome-dependent sampling: reverse-regression estimation, power and simulation"};
  app.require_subcommand(1);

  eods::cli::AnalyzeOptions analyze;
  auto* a = app.add_subcommand("analyze", "Estimate the biomarker effect from a study CSV");
  a->add_option("--input", analyze.input, "Study CSV")->required();
  a->add_option("--response", analyze.response, "Response column")->required();
  a->add_option("--biomarker", analyze.biomarker, "Biomarker column")->required();
  a->add_option("--confidence", analyze.confidence, "Confidence level")->capture_default_str();
  a->add_flag("--log10", analyze.log10, "log10-transform the biomarker");
  a->add_option("--out", analyze.out, "JSON report path (diagnostics written alongside)");

  eods::cli::PlanOptions plan;
  std::int64_t n_full = 0;
  double gamma = 0, target = 0, effect_f = 0, rho = 0;
  auto* p = app.add_subcommand("plan", "Power or sample size for an extreme-sampling design");
  auto* o_n = p->add_option("--n-full", n_full, "Full cohort size");
  auto* o_g = p->add_option("--gamma", gamma, "Fraction biomarker-tested (both tails)");
  auto* o_t = p->add_option("--target-power", target, "Target power");
  auto* o_f = p->add_option("--effect-f", effect_f, "Cohen's f");
  auto* o_r = p->add_option("--rho", rho, "Correlation (converted to f)");
  p->add_option("--alpha", plan.alpha, "Significance level")->capture_default_str();

  eods::cli::ScreenOptions screen;
  auto* s = app.add_subcommand("screen", "Screen several biomarkers with BH q-values");
  s->add_option("--input", screen.input, "Study CSV")->required();
  s->add_option("--response", screen.response, "Response column")->required();
  s->add_option("--biomarkers", screen.biomarkers, "Biomarker columns (default: all others)")
      ->delimiter(',');
  s->add_option("--id-column", screen.id_column, "Identifier column excluded from screening")
      ->capture_default_str();
  s->add_option("--confidence", screen.confidence, "Confidence level")->capture_default_str();
  s->add_option("--bh-level", screen.bh_level, "BH discovery level")->capture_default_str();
  s->add_flag("--log10", screen.log10, "log10-transform biomarkers");
  s->add_option("--out", screen.out, "Output CSV (default: standard output)");

  eods::cli::SimulateOptions simulate;
  auto* m = app.add_subcommand("simulate", "Run a Monte Carlo grid from a config file");
  m->add_option("--config", simulate.config, "Grid config (key = v1, v2, ...)")->required();
  m->add_option("--out", simulate.out, "Metrics CSV (default: standard output)");
  m->add_option("--workers", simulate.workers, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  std::uint64_t seed = 0;
  auto* o_seed = m->add_option("--seed", seed, "Seed for every grid cell (overrides the config)");

  eods::cli::CheckOptions check;
  auto* c = app.add_subcommand("check", "Write normal QQ series for model checking");
  c->add_option("--input", check.input, "Study CSV")->required();
  c->add_option("--response", check.response, "Response column")->required();
  c->add_option("--biomarker", check.biomarker, "Biomarker column")->required();
  c->add_flag("--log10", check.log10, "log10-transform the biomarker");
  c->add_option("--out", check.out_prefix, "Output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version keep CLI11's exit 0; usage errors map to 2
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (a->parsed()) {
      const auto report = eods::cli::run_analyze(analyze);
      eods::cli::print_analyze_summary(report, std::cout);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    } else if (p->parsed()) {
      plan.n_full = opt_if(o_n, n_full);
      plan.gamma = opt_if(o_g, gamma);
      plan.target_power = opt_if(o_t, target);
      plan.effect_f = opt_if(o_f, effect_f);
      plan.rho = opt_if(o_r, rho);
      eods::cli::print_plan(eods::cli::run_plan(plan), std::cout);
    } else if (s->parsed()) {
      const auto rows = eods::cli::run_screen(screen);
      if (screen.out.empty()) eods::cli::write_screen_csv(rows, screen.bh_level, std::cout);
    } else if (m->parsed()) {
      simulate.seed = opt_if(o_seed, seed);
      const auto rows = eods::cli::run_simulate(simulate);
      if (simulate.out.empty()) eods::cli::write_grid_csv(rows, std::cout);
    } else if (c->parsed()) {
      eods::cli::print_check(eods::cli::run_check(check), std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return eods::cli::exit_code_for(e);
  }
  return 0;
}
