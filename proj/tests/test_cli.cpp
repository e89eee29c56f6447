#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "eods/commands.hpp"
#include "eods/errors.hpp"
#include "eods/regress.hpp"
#include "eods/study_table.hpp"

using namespace eods;
using namespace eods::cli;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const std::string kData = EODS_TEST_DATA_DIR;

std::string data(const std::string& name) { return kData + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("eods_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    const std::string p = *this / name;
    std::ofstream(p) << text;
    return p;
  }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(const std::string& args) {
  TempDir tmp;
  const std::string o = tmp / "stdout", e = tmp / "stderr";
  const std::string cmd = std::string("'") + EODS_CLI_PATH + "' " + args + " >'" + o + "' 2>'" + e + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("format_number") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(-1.5e-300) == "-1.5000000000000001e-300");
  CHECK(format_number(NAN) == "NA");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("study CSV parsing") {
  const auto t = StudyTable::parse_csv(
      "\xEF\xBB\xBFid,\"y\", marker\n"
      "a,1.5,\n"
      "\"b,c\",2,NA\n"
      "d, 3 ,4e-1\n");
  CHECK(t.header == std::vector<std::string>{"id", "y", "marker"});
  CHECK(t.rows() == 3);
  CHECK(t.cells[1][0] == "b,c");
  const Vector y = t.required_column("y");
  CHECK(y(2) == 3.0);
  const Vector m = t.optional_column("marker");
  CHECK(std::isnan(m(0)));
  CHECK(std::isnan(m(1)));
  CHECK(m(2) == 0.4);
  CHECK_THROWS_AS(t.column_index("nope"), SchemaError);
  CHECK_THROWS_AS(StudyTable::parse_csv("a,b\n1,2,3\n"), SchemaError);
  CHECK_THROWS_AS(StudyTable::parse_csv(""), SchemaError);
  CHECK_THROWS_AS(StudyTable::read_csv("/nonexistent.csv"), FileError);
}

TEST_CASE("analyze reproduces the golden report") {
  TempDir tmp;
  AnalyzeOptions o;
  o.input = data("study.csv");
  o.response = "y";
  o.biomarker = "marker";
  o.out = tmp / "analyze.json";
  const AnalyzeReport r = run_analyze(o);
  CHECK(slurp(o.out) == slurp(data("golden/analyze_study.json")));
  CHECK(fs::exists(tmp / "analyze.response_qq.csv"));
  CHECK(fs::exists(tmp / "analyze.residual_qq.csv"));
  CHECK(r.n_full == 400);
  CHECK(r.n_selected == 80);
  CHECK(r.gamma_effective == 0.2);
  CHECK(r.warnings.empty());
  // the fixture was generated with beta_y = 0.4
  CHECK(r.estimate.ci_low <= 0.4);
  CHECK(0.4 <= r.estimate.ci_high);
  CHECK(r.estimate.ci_low <= r.estimate.beta_y);
  CHECK(r.estimate.beta_y <= r.estimate.ci_high);
  CHECK(r.estimate.p_value < 0.05);
  // independent numpy computation in make_fixtures.py
  CHECK(r.estimate.beta_y == Approx(0.2999449303168662).epsilon(1e-12));
  CHECK(r.estimate.alpha_y == Approx(5.0888578861055915).epsilon(1e-12));
  CHECK(r.estimate.se_beta_y == Approx(0.07282595685989662).epsilon(1e-12));

  const auto qq = StudyTable::read_csv(tmp / "analyze.residual_qq.csv");
  CHECK(qq.rows() == 80);
  CHECK(qq.header == std::vector<std::string>{"theoretical_quantile", "ordered_value"});
}

TEST_CASE("analyze through the executable") {
  TempDir tmp;
  const Run r = run_cli("analyze --input '" + data("study.csv") +
                        "' --response y --biomarker marker --out '" + (tmp / "rep.json") + "'");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "n_F = 400, n_S = 80"));
  CHECK(contains(r.out, "beta_Y = 0.2999"));
  CHECK(slurp(tmp / "rep.json") ==
        [&] {
          std::string g = slurp(data("golden/analyze_study.json"));
          const std::string from = "\"analyze.", to = "\"rep.";
          for (auto p = g.find(from); p != std::string::npos; p = g.find(from, p + to.size()))
            g.replace(p, from.size(), to);
          return g;
        }());
}

TEST_CASE("analyze with a fully tested biomarker") {
  AnalyzeOptions o;
  o.input = data("full.csv");
  o.response = "y";
  o.biomarker = "marker";
  const AnalyzeReport r = run_analyze(o);
  CHECK(r.gamma_effective == 1.0);

  const auto t = StudyTable::read_csv(o.input);
  const Vector x = t.required_column("marker"), y = t.required_column("y");
  const double n = static_cast<double>(x.size());
  const Vector dx = x.array() - x.mean(), dy = y.array() - y.mean();
  const double sxx = dx.squaredNorm(), syy = dy.squaredNorm(), sxy = dx.dot(dy);
  const double sse_x = sxx - sxy * sxy / syy;
  // the divisors n-2 (reverse residual variance) and n-1 (response variance)
  // leave a small gap to the forward slope
  const double closed_form = sxy / ((n - 1) / (n - 2) * sse_x + sxy * sxy / syy);
  CHECK(r.estimate.beta_y == Approx(closed_form).epsilon(1e-9));
  const FitResult ols = fit_simple(x, y);
  CHECK(ols.slope == Approx(0.7399524585996297).epsilon(1e-12));
  const double gap = std::fabs(r.estimate.beta_y - ols.slope) / ols.slope;
  CHECK(gap > 0.0);
  CHECK(gap <= (1.0 - ols.r_squared) / (n - 2));
}

TEST_CASE("analyze schema errors") {
  TempDir tmp;
  const std::string missing_y = tmp.write("m.csv", "id,y,marker\n1,1,2\n2,,3\n3,3,4\n4,4,1\n5,5,2\n");
  AnalyzeOptions o{missing_y, "y", "marker"};
  try {
    run_analyze(o);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(contains(e.what(), "row 2"));
    CHECK(contains(e.what(), "'y'"));
  }
  o.input = data("study.csv");
  o.biomarker = "absent";
  try {
    run_analyze(o);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(contains(e.what(), "absent"));
  }
  const Run r = run_cli("analyze --input '" + missing_y + "' --response y --biomarker marker");
  CHECK(r.code == 4);
  CHECK(contains(r.err, "row 2"));
  CHECK(run_cli("analyze --input /nonexistent.csv --response y --biomarker m").code == 3);
  CHECK(run_cli("analyze --response y").code == 2);
  CHECK(run_cli("plan --bogus 1").code == 2);
  CHECK(run_cli("analyze --help").code == 0);

  const std::string few = tmp.write("f.csv", "y,m\n1,\n2,1\n3,\n4,2\n5,3\n");
  CHECK_THROWS_AS(run_analyze({few, "y", "m"}), InsufficientData);
  CHECK(run_cli("analyze --input '" + few + "' --response y --biomarker m").code == 6);

  const std::string neg = tmp.write("n.csv", "y,m\n1,1\n2,-1\n3,2\n4,5\n5,3\n");
  AnalyzeOptions lg{neg, "y", "m", 0.95, true};
  CHECK_THROWS_AS(run_analyze(lg), DomainError);
}

TEST_CASE("analyze warns when the tested subset is not extreme") {
  TempDir tmp;
  std::ostringstream csv;
  csv << "y,m\n";
  for (int i = 0; i < 20; ++i) csv << i << ',' << ((i % 3 == 0) ? std::to_string(i * 0.5 + (i % 2)) : "") << '\n';
  AnalyzeOptions o{tmp.write("w.csv", csv.str()), "y", "m"};
  const AnalyzeReport r = run_analyze(o);
  REQUIRE(r.warnings.size() == 1);
  CHECK(contains(r.warnings[0], "not an extreme-response sample"));
}

TEST_CASE("screen matches analyze for every biomarker") {
  for (bool log10 : {false, true}) {
    ScreenOptions s;
    s.input = data("study.csv");
    s.response = "y";
    s.log10 = log10;
    s.biomarkers = log10 ? std::vector<std::string>{"conc"} : std::vector<std::string>{};
    const auto rows = run_screen(s);
    CHECK(rows.size() == (log10 ? 1u : 3u));
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].p_value >= rows[k - 1].p_value);
    for (const ScreenRow& row : rows) {
      AnalyzeOptions a;
      a.input = s.input;
      a.response = "y";
      a.biomarker = row.biomarker_id;
      a.log10 = log10;
      const AnalyzeReport r = run_analyze(a);
      CHECK(row.estimate == r.estimate.beta_y);
      CHECK(row.se == r.estimate.se_beta_y);
      CHECK(row.ci_low == r.estimate.ci_low);
      CHECK(row.ci_high == r.estimate.ci_high);
      CHECK(row.p_value == r.estimate.p_value);
      CHECK(row.n_selected == r.n_selected);
    }
  }
}

TEST_CASE("screen CSV output") {
  TempDir tmp;
  const Run r = run_cli("screen --input '" + data("study.csv") + "' --response y --out '" +
                        (tmp / "s.csv") + "'");
  CHECK(r.code == 0);
  const std::string csv = slurp(tmp / "s.csv");
  CHECK(csv.rfind("Biomarker,Estimate,Std. Error,LCL,UCL,P-Value,Q-Value,Rank,n_S,BH_Discovery,Error\n", 0) ==
        0);
  CHECK(contains(csv, "\nmarker,0.29994493031686614,"));
  const Run stdout_run =
      run_cli("screen --input '" + data("study.csv") + "' --response y --biomarkers marker,null_marker");
  CHECK(stdout_run.code == 0);
  CHECK(contains(stdout_run.out, "marker,0.29994493031686614,"));
  CHECK_FALSE(contains(stdout_run.out, "conc"));
  // negative values under log10 abort with the biomarker named
  const Run bad = run_cli("screen --input '" + data("study.csv") + "' --response y --log10");
  CHECK(bad.code == 8);
  CHECK(contains(bad.err, "marker"));
}

TEST_CASE("null screen of 13 biomarkers") {
  ScreenOptions s;
  s.input = data("null_screen.csv");
  s.response = "y";
  const auto rows = run_screen(s);
  REQUIRE(rows.size() == 13);
  for (const auto& r : rows) {
    CHECK(r.n_selected == 88);
    CHECK(r.q_value >= r.p_value);
  }

  // repeated null screens: false discoveries should be rare
  std::mt19937_64 rng(8080);
  std::normal_distribution<double> z;
  const int runs = 1000, n = 440;
  int any_discovery = 0, raw_hits = 0;
  for (int run = 0; run < runs; ++run) {
    Vector y(n);
    for (auto& v : y) v = z(rng);
    const auto plan = select_extremes(y, 0.2);
    std::vector<bool> chosen(n, false);
    for (auto i : plan.all_indices()) chosen[i] = true;
    std::vector<BiomarkerColumn> cols;
    for (int k = 0; k < 13; ++k) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x(i) = chosen[i] ? z(rng) : NAN;
      cols.push_back({"b" + std::to_string(k), x});
    }
    const auto res = screen_biomarkers(cols, y, FullResponseSummary::from_responses(y), 0.95, false);
    bool hit = false;
    for (const auto& r : res) {
      raw_hits += r.p_value < 0.05;
      hit = hit || r.q_value < 0.05;
    }
    any_discovery += hit;
  }
  const double mean_raw = static_cast<double>(raw_hits) / runs;
  CHECK(mean_raw > 0.5);
  CHECK(mean_raw < 0.8);
  CHECK(static_cast<double>(any_discovery) / runs <= 0.07);
}

TEST_CASE("plan command") {
  Run r = run_cli("plan --n-full 119 --gamma 1.0 --effect-f 0.3");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "power 0.9007"));
  CHECK(contains(r.out, "n_full = 119, gamma = 1, effect_f = 0.3, alpha = 0.05"));

  r = run_cli("plan --n-full 200 --effect-f 0.3 --alpha 0.05 --target-power 0.90");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "mode: min-gamma"));
  CHECK(contains(r.out, "select 38 (19 per tail) of n_F 200, power 0.9073"));

  r = run_cli("plan --gamma 1 --effect-f 0.3 --target-power 0.9");
  CHECK(contains(r.out, "of n_F 119,"));

  r = run_cli("plan --n-full 300 --gamma 0.2 --effect-f 0 --alpha 0.05");
  CHECK(contains(r.out, "power 0.0500"));

  PlanOptions p;
  p.n_full = 200;
  p.gamma = 0.1;
  p.rho = 0.6;
  const PlanReport rep = run_plan(p);
  CHECK(rep.effect_f == Approx(0.75).epsilon(1e-14));

  r = run_cli("plan --n-full 200 --effect-f 0.3 --target-power 0.9985");
  CHECK(r.code == 7);
  CHECK_FALSE(r.err.empty());
  CHECK(run_cli("plan --n-full 200 --effect-f 0.3").code == 8);
  CHECK(run_cli("plan --n-full 200 --gamma 0.1 --effect-f 0.3 --rho 0.2").code == 8);
}

TEST_CASE("simulate is byte-identical across worker counts") {
  TempDir tmp;
  const std::string cfg = tmp.write("grid.cfg",
                                    "n_full = 100, 200\n"
                                    "beta_y = 0, 0.4\n"
                                    "gamma = 0.2\n"
                                    "estimator = ols, odeb\n"
                                    "replicates = 60\n"
                                    "seed = 99\n");
  const Run one = run_cli("simulate --config '" + cfg + "' --workers 1 --out '" + (tmp / "w1.csv") + "'");
  const Run eight = run_cli("simulate --config '" + cfg + "' --workers 8 --out '" + (tmp / "w8.csv") + "'");
  CHECK(one.code == 0);
  CHECK(eight.code == 0);
  const std::string a = slurp(tmp / "w1.csv");
  CHECK(a == slurp(tmp / "w8.csv"));
  CHECK(std::count(a.begin(), a.end(), '\n') == 9);

  const Run stdout_run = run_cli("simulate --config '" + cfg + "' --workers 3");
  CHECK(stdout_run.out == a);
  const Run reseeded = run_cli("simulate --config '" + cfg + "' --seed 100");
  CHECK(reseeded.code == 0);
  CHECK(reseeded.out != a);
  CHECK(contains(reseeded.out, ",60,100,"));
  CHECK(run_cli("simulate --config '" + cfg + "' --workers 0").code != 0);
}

TEST_CASE("simulate one-cell grid equals run_scenario") {
  TempDir tmp;
  const std::string cfg = tmp.write("one.cfg", "n_full = 150\nbeta_y = 0.3\nreplicates = 80\n");
  const auto rows = run_simulate({cfg, "", 1});
  REQUIRE(rows.size() == 1);
  sim::SimScenario sc;
  sc.n_full = 150;
  sc.beta_y = 0.3;
  sc.replicates = 80;
  const auto m = sim::run_scenario(sc);
  CHECK(rows[0].metrics->mean_estimate == m.mean_estimate);
  CHECK(rows[0].metrics->rejection_rate == m.rejection_rate);
  std::ostringstream csv;
  write_grid_csv(rows, csv);
  CHECK(contains(csv.str(), "150,0.29999999999999999,5,5,0,5,normal,0.20000000000000001,extreme,odeb,80,"));
}

TEST_CASE("simulate config errors") {
  TempDir tmp;
  const std::string cfg = tmp.write("bad.cfg", "n_full = 100\nwidth = 3\n");
  const Run r = run_cli("simulate --config '" + cfg + "'");
  CHECK(r.code == 5);
  CHECK(contains(r.err, "bad.cfg:2"));
  CHECK(contains(r.err, "width"));
  CHECK(run_cli("simulate --config /nonexistent.cfg").code == 3);
}

TEST_CASE("check on normal data") {
  TempDir tmp;
  CheckOptions o{data("check_normal.csv"), "y", "marker", false, tmp / "normal"};
  const CheckReport r = run_check(o);
  CHECK(r.response_qq_slope >= 0.95);
  CHECK(r.response_qq_slope <= 1.05);
  CHECK(r.residual_qq_slope >= 0.95);
  CHECK(r.residual_qq_slope <= 1.05);
  CHECK(r.flags.empty());
  CHECK(fs::exists(tmp / "normal_response_qq.csv"));
  CHECK(fs::exists(tmp / "normal_residual_qq.csv"));
  CHECK(StudyTable::read_csv(tmp / "normal_response_qq.csv").rows() == 800);
  CHECK(StudyTable::read_csv(tmp / "normal_residual_qq.csv").rows() == 160);
}

TEST_CASE("check flags skewed responses") {
  TempDir tmp;
  const Run r = run_cli("check --input '" + data("check_lognormal.csv") +
                        "' --response y --biomarker marker --out '" + (tmp / "ln") + "'");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "flag: response (A): |skewness|"));
  CHECK(contains(r.out, "wrote " + (tmp / "ln_response_qq.csv")));

  const std::string two = tmp.write("two.csv", "y,m\n1,1\n2,\n3,\n4,\n5,2\n");
  CHECK_THROWS_AS(run_check({two, "y", "m", false, ""}), DegenerateInput);
  CHECK(run_cli("check --input '" + two + "' --response y --biomarker m --out '" + (tmp / "x") + "'").code == 6);
}
