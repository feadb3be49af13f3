#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfvi/cli.hpp"
#include "rfvi/config.hpp"
#include "rfvi/experiments.hpp"

using namespace rfvi;

namespace {

std::string report_text(const ExperimentReport& r) {
  std::ostringstream a;
  write_report_csv(r, a);
  write_raw_csv(r, a);
  write_quantiles_csv(r, a);
  return a.str();
}

MonteCarloConfig tiny_mc() {
  MonteCarloConfig c;
  c.n_grid = {40};
  c.ir_grid = {1, 4};
  c.replicates = 1;
  c.methods = {ImportanceMethod::gini, ImportanceMethod::perm_auc_over};
  c.forest.ntree = 20;
  c.seed = Seed{3};
  return c;
}

CvBenchmarkConfig tiny_cv() {
  CvBenchmarkConfig c;
  DatasetSource s;
  s.name = "twn";
  s.generator = BenchmarkSpec{Benchmark::twonorm, 120, 4, {}};
  c.datasets = {s};
  c.selectors = {Selector::auc};
  c.folds = 3;
  c.replicates = 2;
  c.forest.ntree = 20;
  c.seed = Seed{4};
  return c;
}

ExperimentReport raw_report(const std::vector<std::tuple<std::string, std::string, std::vector<double>>>& cells) {
  ExperimentReport r;
  for (const auto& [ds, m, values] : cells)
    for (std::size_t i = 0; i < values.size(); ++i) r.raw.push_back({ds, m, i, "cv_auc", values[i]});
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("rfvi-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rfvi");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("Monte Carlo runs are reproducible") {
  const auto a = run_monte_carlo(tiny_mc());
  const auto b = run_monte_carlo(tiny_mc());
  CHECK(report_text(a) == report_text(b));
  auto threaded = tiny_mc();
  threaded.workers = 4;
  CHECK(report_text(run_monte_carlo(threaded)) == report_text(a));
  CHECK(a.failures.empty());
}

TEST_CASE("Monte Carlo report layout") {
  auto cfg = tiny_mc();
  cfg.replicates = 3;
  const auto r = run_monte_carlo(cfg);
  for (const auto* setting : {"N=40 IR=1", "N=40 IR=4"})
    for (const auto* method : {"gini", "perm-auc-over"}) {
      for (const auto* stat : {"misclassified_strong", "misclassified_moderate", "misclassified_weak",
                               "achieved_ir", "mean_strong", "mean_noise"}) {
        std::size_t hits = 0;
        for (const auto& row : r.rows)
          hits += row.setting == setting && row.method == method && row.statistic == stat;
        CHECK(hits == 1);
      }
      CHECK(r.replicate_values(setting, method, "importance_X1").size() == 3);
    }
  CHECK(*r.find("N=40 IR=4", "gini", "achieved_ir") == 4.0);
  CHECK(r.quantiles.size() == 2 * 2 * 30);
  for (const auto& q : r.quantiles) CHECK(std::is_sorted(q.q.begin(), q.q.end()));
}

TEST_CASE("Monte Carlo config validation") {
  auto c = tiny_mc();
  c.replicates = 0;
  CHECK_THROWS_AS(run_monte_carlo(c), UsageError);
  c = tiny_mc();
  c.n_grid.clear();
  CHECK_THROWS_AS(run_monte_carlo(c), UsageError);
}

TEST_CASE("benchmark bookkeeping") {
  const auto r = run_cv_benchmark(tiny_cv());
  REQUIRE(r.failures.empty());
  const auto v = r.replicate_values("twn", "auc", "cv_auc");
  REQUIRE(v.size() == 2);
  CHECK(v[0] != v[1]);
  CHECK(*r.find("twn", "auc", "cv_auc") == Catch::Approx((v[0] + v[1]) / 2).epsilon(1e-15));
  CHECK(*r.find("twn", "auc", "cv_auc_sd") == Catch::Approx(std::abs(v[0] - v[1]) / std::sqrt(2.0)));
  for (double n : r.replicate_values("twn", "auc", "n_candidates")) CHECK(n <= 4.0);
}

TEST_CASE("benchmark is independent of the worker count") {
  auto c = tiny_cv();
  c.selectors = {Selector::auc, Selector::calle};
  const auto a = run_cv_benchmark(c);
  c.workers = 3;
  CHECK(report_text(run_cv_benchmark(c)) == report_text(a));
}

TEST_CASE("benchmark reports unusable data sets") {
  auto c = tiny_cv();
  DatasetSource missing;
  missing.name = "gone";
  missing.path = "/nonexistent/file.csv";
  c.datasets.push_back(missing);
  const auto r = run_cv_benchmark(c);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].setting == "gone");
  CHECK(r.find("twn", "auc", "cv_auc").has_value());
}

TEST_CASE("pairwise comparison of identical methods") {
  const auto r = raw_report({{"d1", "a", {0.8, 0.7, 0.9}},
                             {"d1", "b", {0.8, 0.7, 0.9}},
                             {"d2", "a", {0.6, 0.6, 0.5}},
                             {"d2", "b", {0.6, 0.6, 0.5}}});
  const auto t = run_pairwise_comparison(r);
  for (const auto& c : t.cells) {
    CHECK(c.wins == 0);
    CHECK(c.significant == 0);
    CHECK(c.overall_p == 1.0);
  }
}

TEST_CASE("pairwise counts add up") {
  Rng rng(Seed{51});
  std::vector<std::tuple<std::string, std::string, std::vector<double>>> cells;
  for (int d = 0; d < 6; ++d)
    for (const char* m : {"a", "b", "c"}) {
      std::vector<double> v;
      for (int r = 0; r < 8; ++r) v.push_back(std::round(rng.uniform01() * 4) / 4);
      cells.emplace_back("d" + std::to_string(d), m, v);
    }
  const auto t = run_pairwise_comparison(raw_report(cells));
  for (const auto& c : t.cells) {
    const auto& mirror = t.at(c.column, c.row);
    CHECK(c.wins + mirror.wins + c.ties == 6);
    CHECK(c.ties == mirror.ties);
    CHECK(c.significant <= c.wins);
  }
}

TEST_CASE("pairwise significance") {
  std::vector<double> low, high;
  for (int r = 0; r < 10; ++r) {
    low.push_back(0.80 + 0.001 * r);
    high.push_back(0.85 + 0.002 * r);
  }
  const auto t = run_pairwise_comparison(
      raw_report({{"d1", "base", low}, {"d1", "new", high}, {"d2", "base", low}, {"d2", "new", high}}));
  CHECK(t.at("base", "new").wins == 2);
  CHECK(t.at("base", "new").significant == 2);
  CHECK(t.at("new", "base").wins == 0);

  const auto single = run_pairwise_comparison(raw_report({{"d1", "base", {0.5}}, {"d1", "new", {0.6}}}));
  CHECK(single.at("base", "new").wins == 1);
  CHECK(single.at("base", "new").untested == 1);
  CHECK(single.at("base", "new").significant == 0);
  CHECK_THROWS_AS(run_pairwise_comparison(raw_report({{"d1", "only", {0.5}}})), DataError);
}

TEST_CASE("raw csv round trip") {
  const auto r = raw_report({{"d 1", "a", {0.8, 0.75}}, {"d,2", "b", {0.5, 0.25}}});
  std::stringstream buf;
  write_raw_csv(r, buf);
  const auto back = read_raw_csv(buf);
  REQUIRE(back.raw.size() == r.raw.size());
  for (std::size_t i = 0; i < r.raw.size(); ++i) {
    CHECK(back.raw[i].setting == r.raw[i].setting);
    CHECK(back.raw[i].replicate == r.raw[i].replicate);
    CHECK(back.raw[i].value == r.raw[i].value);
  }
}

TEST_CASE("config files") {
  std::istringstream mc(
      "# study\n"
      "n_grid = 50, 100\n"
      "ir_grid = 1, 2.5\n"
      "replicates = 7   # trailing comment\n"
      "methods = gini, perm-auc-over\n"
      "ntree = 100\n"
      "seed = 99\n"
      "workers = 2\n");
  const auto m = parse_monte_carlo_config(mc);
  CHECK(m.n_grid == std::vector<std::size_t>{50, 100});
  CHECK(m.ir_grid == std::vector<double>{1, 2.5});
  CHECK(m.replicates == 7);
  CHECK(m.methods.size() == 2);
  CHECK(m.forest.ntree == 100);
  CHECK(m.seed.value == 99);
  CHECK(m.workers == 2);

  std::istringstream cv(
      "dataset = twn generator=twonorm n=500 d=8\n"
      "dataset = cir generator=circle radius=0.9\n"
      "dataset = mine path=data/x.csv label=class positive=yes\n"
      "selectors = auc, auc-over\n"
      "folds = 4\n"
      "replicates = 3\n");
  const auto b = parse_benchmark_config(cv, "b.cfg", "/base");
  REQUIRE(b.datasets.size() == 3);
  CHECK(b.datasets[0].generator->n == 500);
  CHECK(b.datasets[0].generator->d == 8);
  CHECK(b.datasets[1].generator->radius.value() == 0.9);
  CHECK(b.datasets[2].path == "/base/data/x.csv");
  CHECK(b.datasets[2].label == "class");
  CHECK(b.folds == 4);
  CHECK(b.selectors.size() == 2);

  auto bad = [](const std::string& text) {
    std::istringstream in(text);
    return parse_monte_carlo_config(in);
  };
  CHECK_THROWS_AS(bad("colour = red\n"), UsageError);
  CHECK_THROWS_AS(bad("replicates = 3\nreplicates = 4\n"), UsageError);
  CHECK_THROWS_AS(bad("replicates = three\n"), UsageError);
  CHECK_THROWS_AS(bad("replicates\n"), UsageError);
  CHECK_THROWS_AS(bad("methods = gini, lasso\n"), UsageError);
  std::istringstream no_data("folds = 5\n");
  CHECK_THROWS_AS(parse_benchmark_config(no_data), UsageError);
  std::istringstream bad_attr("dataset = x generator=twonorm size=3\n");
  CHECK_THROWS_AS(parse_benchmark_config(bad_attr), UsageError);
}

TEST_CASE("command line") {
  const auto dir = scratch("cli");
  const auto sim = (dir / "sim.csv").string();
  CHECK(run_cli({"simulate", "--n", "80", "--ir", "3", "--seed", "2", "--out", sim}) == 0);
  CHECK(run_cli({"importance", "--data", sim, "--label", "y", "--positive", "1", "--method",
                 "perm-auc-under", "--ntree", "20", "--seed", "1", "--out", (dir / "imp.csv").string(),
                 "--save-forest", (dir / "forest.txt").string()}) == 0);
  CHECK(load_forest((dir / "forest.txt").string()).trees.size() == 20);
  CHECK(run_cli({"select", "--data", sim, "--label", "y", "--positive", "1", "--method", "calle",
                 "--u", "2", "--seed", "1", "--ntree", "20", "--out", (dir / "sel.json").string()}) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "sel.json"));
  CHECK(j["n_candidates"] == 11);

  CHECK(run_cli({}) == 1);
  CHECK(run_cli({"importance", "--data", sim, "--method", "nope", "--out", "x.csv"}) == 1);
  CHECK(run_cli({"importance", "--data", (dir / "missing.csv").string(), "--method", "gini", "--out",
                 "x.csv"}) == 2);
  CHECK(run_cli({"importance", "--data", sim, "--label", "z", "--method", "gini", "--out", "x.csv"}) == 2);
  CHECK(run_cli({"simulate", "--n", "5", "--out", (dir / "s.csv").string()}) == 1);
  CHECK(run_cli({"--help"}) == 0);

  {
    std::ofstream cfg(dir / "mc.cfg");
    cfg << "n_grid = 30\nir_grid = 2\nreplicates = 2\nmethods = gini\nntree = 10\nseed = 5\n";
  }
  CHECK(run_cli({"mc-study", "--config", (dir / "mc.cfg").string(), "--out-dir", (dir / "mc").string()}) == 0);
  CHECK(std::filesystem::exists(dir / "mc" / "report.csv"));
  CHECK(std::filesystem::exists(dir / "mc" / "quantiles.csv"));
  CHECK(std::filesystem::exists(dir / "mc" / "failures.csv"));

  {
    std::ofstream cfg(dir / "cv.cfg");
    cfg << "dataset = twn generator=twonorm n=100 d=4\ndataset = sim path=sim.csv\n"
        << "selectors = auc, calle\nfolds = 3\nreplicates = 2\nntree = 10\n";
  }
  CHECK(run_cli({"benchmark", "--config", (dir / "cv.cfg").string(), "--out-dir", (dir / "cv").string()}) == 0);
  CHECK(std::filesystem::exists(dir / "cv" / "comparison.csv"));
  CHECK(run_cli({"compare", "--in", (dir / "cv" / "raw.csv").string(), "--alpha", "0.05", "--out",
                 (dir / "cmp.csv").string()}) == 0);
  CHECK(slurp(dir / "cmp.csv") == slurp(dir / "cv" / "comparison.csv"));
  CHECK(run_cli({"mc-study", "--config", (dir / "none.cfg").string(), "--out-dir", (dir / "x").string()}) == 1);
  std::filesystem::remove_all(dir);
}
