#pragma once

// Command-line front end. run() returns the process exit code:
// 0 success, 1 usage error, 2 data error, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rfvi/config.hpp"
#include "rfvi/csv.hpp"
#include "rfvi/error.hpp"
#include "rfvi/experiments.hpp"
#include "rfvi/forest_io.hpp"
#include "rfvi/importance.hpp"
#include "rfvi/selection.hpp"
#include "rfvi/synthgen.hpp"

namespace rfvi::cli {

enum ExitCode : int { ok = 0, usage = 1, data = 2, internal = 3 };

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  auto out = open_out(path);
  fn(out);
  if (!out) throw DataError("error while writing '" + path.string() + "'");
}

inline Encoding parse_encoding(const std::string& s) {
  if (s == "one-hot") return Encoding::one_hot;
  if (s == "integer") return Encoding::integer;
  throw UsageError("unknown encoding '" + s + "'");
}

struct DataArgs {
  std::string path;
  std::string label = "y";
  std::string positive = "1";
  std::string encoding = "one-hot";

  void add_to(CLI::App* app) {
    app->add_option("--data", path, "input CSV")->required();
    app->add_option("--label", label, "label column")->capture_default_str();
    app->add_option("--positive", positive, "label value of the positive (minority) class")
        ->capture_default_str();
    app->add_option("--encoding", encoding, "categorical columns: one-hot or integer")
        ->capture_default_str();
  }

  Dataset load(std::ostream& err) const {
    auto loaded = load_csv(path, label, positive, parse_encoding(encoding));
    for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
    if (loaded.dropped_rows > 0)
      err << "note: dropped " << loaded.dropped_rows << " rows with missing values\n";
    return std::move(loaded.dataset);
  }
};

struct ForestArgs {
  std::size_t ntree = 200;
  std::size_t mtry = 0;
  std::size_t min_leaf = 1;
  std::size_t threads = 1;

  void add_to(CLI::App* app) {
    app->add_option("--ntree", ntree, "trees per forest")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--mtry", mtry, "variables tried per split (0: floor(sqrt(p)))")->capture_default_str();
    app->add_option("--min-leaf", min_leaf, "minimum leaf size")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--threads", threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  }

  ForestConfig config() const {
    ForestConfig c;
    c.ntree = ntree;
    c.mtry = mtry;
    c.min_leaf_size = min_leaf;
    c.threads = threads;
    return c;
  }
};

inline int write_experiment(const ExperimentReport& rep, const std::filesystem::path& dir,
                            bool with_quantiles, std::ostream& out) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.csv", [&](auto& o) { write_report_csv(rep, o); });
  write_file(dir / "raw.csv", [&](auto& o) { write_raw_csv(rep, o); });
  if (with_quantiles) write_file(dir / "quantiles.csv", [&](auto& o) { write_quantiles_csv(rep, o); });
  write_file(dir / "failures.csv", [&](auto& o) { write_failures_csv(rep, o); });
  write_file(dir / "summary.json", [&](auto& o) { o << report_summary_json(rep).dump(2) << '\n'; });
  out << "wrote " << rep.rows.size() << " report rows to " << (dir / "report.csv").string() << '\n';
  return rep.failures.empty() ? ok : data;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Random-forest variable importance and selection under class imbalance", "rfvi"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a simulation or benchmark data set");
  std::size_t sim_n = 100;
  double sim_ir = 1.0;
  std::uint64_t sim_seed = 1;
  std::string sim_out, sim_gen;
  std::size_t sim_d = 10;
  std::optional<double> sim_radius;
  sim->add_option("--n", sim_n, "number of rows")->required();
  sim->add_option("--ir", sim_ir, "imbalance ratio n0/n1 (simulation design only)")->capture_default_str();
  sim->add_option("--seed", sim_seed, "master seed")->capture_default_str();
  sim->add_option("--out", sim_out, "output CSV")->required();
  sim->add_option("--generator", sim_gen, "twonorm, threenorm, ringnorm or circle instead of the simulation design");
  sim->add_option("--d", sim_d, "benchmark dimension")->capture_default_str();
  sim->add_option("--radius", sim_radius, "circle radius");

  // importance
  auto* imp = app.add_subcommand("importance", "variable importance with confidence intervals");
  detail::DataArgs imp_data;
  detail::ForestArgs imp_forest;
  std::string imp_method, imp_out, imp_save;
  std::uint64_t imp_seed = 1;
  double imp_u = 2.0;
  imp_data.add_to(imp);
  imp_forest.add_to(imp);
  imp->add_option("--method", imp_method, "gini, perm-accu, perm-auc, perm-auc-under or perm-auc-over")->required();
  imp->add_option("--seed", imp_seed, "master seed")->capture_default_str();
  imp->add_option("--u", imp_u, "interval half-width multiplier")->capture_default_str()->check(CLI::PositiveNumber);
  imp->add_option("--out", imp_out, "output CSV")->required();
  imp->add_option("--save-forest", imp_save, "also write the trained forest");

  // select
  auto* sel = app.add_subcommand("select", "select an optimal feature set");
  detail::DataArgs sel_data;
  detail::ForestArgs sel_forest;
  std::string sel_method, sel_out;
  std::uint64_t sel_seed = 1;
  double sel_u = 2.0, sel_drop = 0.2;
  sel_data.add_to(sel);
  sel_forest.add_to(sel);
  sel->add_option("--method", sel_method, "auc, auc-under, auc-over, diaz-uri or calle")->required();
  sel->add_option("--u", sel_u, "interval half-width multiplier")->capture_default_str()->check(CLI::PositiveNumber);
  sel->add_option("--seed", sel_seed, "master seed")->capture_default_str();
  sel->add_option("--drop-rate", sel_drop, "baseline elimination rate")->capture_default_str();
  sel->add_option("--out", sel_out, "output JSON")->required();

  // mc-study
  auto* mc = app.add_subcommand("mc-study", "Monte Carlo importance study");
  std::string mc_config, mc_dir;
  std::optional<std::size_t> mc_workers;
  mc->add_option("--config", mc_config, "configuration file")->required();
  mc->add_option("--out-dir", mc_dir, "output directory")->required();
  mc->add_option("--workers", mc_workers, "override the configured worker count")->check(CLI::PositiveNumber);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "cross-validated selection benchmark");
  std::string bench_config, bench_dir;
  std::optional<std::size_t> bench_workers;
  double bench_alpha = 0.05;
  bench->add_option("--config", bench_config, "configuration file")->required();
  bench->add_option("--out-dir", bench_dir, "output directory")->required();
  bench->add_option("--workers", bench_workers, "override the configured worker count")->check(CLI::PositiveNumber);
  bench->add_option("--alpha", bench_alpha, "significance level of the comparison")->capture_default_str();

  // compare
  auto* cmp = app.add_subcommand("compare", "pairwise comparison of methods");
  std::string cmp_in, cmp_out, cmp_stat = "cv_auc";
  double cmp_alpha = 0.05;
  cmp->add_option("--in", cmp_in, "per-replicate CSV (raw.csv of a benchmark run)")->required();
  cmp->add_option("--alpha", cmp_alpha, "significance level")->capture_default_str();
  cmp->add_option("--statistic", cmp_stat, "statistic to compare")->capture_default_str();
  cmp->add_option("--out", cmp_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (*sim) {
      Dataset data = [&] {
        if (!sim_gen.empty()) {
          BenchmarkSpec spec{parse_benchmark(sim_gen), sim_n, sim_d, sim_radius};
          return gen_benchmark(spec, Seed{sim_seed});
        }
        SimulationConfig cfg;
        cfg.total = sim_n;
        cfg.imbalance = sim_ir;
        return gen_simulation(cfg, Seed{sim_seed});
      }();
      detail::write_file(sim_out, [&](auto& o) { write_csv(data, o); });
      out << "wrote " << data.rows() << " rows (" << data.count(0) << " class 0, " << data.count(1)
          << " class 1) to " << sim_out << '\n';
    } else if (*imp) {
      const auto method = parse_importance_method(imp_method);
      const Dataset data = imp_data.load(err);
      Forest forest;
      const auto rep = measure_importance(data, method, imp_forest.config(), Seed{imp_seed}, imp_u,
                                          imp_save.empty() ? nullptr : &forest);
      detail::write_file(imp_out, [&](auto& o) { write_importance_csv(rep, o); });
      if (!imp_save.empty()) save_forest(forest, imp_save);
      for (const auto& r : rep.records)
        if (!r.computable)
          err << "warning: importance of " << rep.names[r.variable]
              << " is not computable (every tree skipped); reported as 0\n";
      out << "wrote " << rep.records.size() << " importances to " << imp_out << '\n';
    } else if (*sel) {
      const auto method = parse_selector(sel_method);
      const Dataset data = sel_data.load(err);
      std::vector<std::string> notes;
      const auto res = method == Selector::diaz_uri || method == Selector::calle
                           ? run_selector(data, method, sel_forest.config(), Seed{sel_seed}, sel_u, sel_drop)
                           : select_optimal(data, method, sel_forest.config(), Seed{sel_seed}, sel_u, &notes);
      for (const auto& n : notes) err << "note: " << n << '\n';
      auto j = selection_to_json(res, data.names());
      j["seed"] = sel_seed;
      j["u"] = sel_u;
      detail::write_file(sel_out, [&](auto& o) { o << j.dump(2) << '\n'; });
      out << "selected " << res.best().variables.size() << " of " << data.cols()
          << " variables from " << res.n_candidates() << " candidates\n";
    } else if (*mc) {
      auto cfg = load_monte_carlo_config(mc_config);
      if (mc_workers) cfg.workers = *mc_workers;
      const auto rep = run_monte_carlo(cfg);
      const std::filesystem::path dir(mc_dir);
      const int code = detail::write_experiment(rep, dir, true, out);
      detail::write_file(dir / "table.txt", [&](auto& o) { write_misclassification_text(rep, o); });
      if (!rep.failures.empty()) err << "error: " << rep.failures.size() << " replicates failed, see failures.csv\n";
      return code;
    } else if (*bench) {
      auto cfg = load_benchmark_config(bench_config);
      if (bench_workers) cfg.workers = *bench_workers;
      const auto rep = run_cv_benchmark(cfg);
      const std::filesystem::path dir(bench_dir);
      const int code = detail::write_experiment(rep, dir, false, out);
      if (cfg.selectors.size() >= 2 && !rep.raw.empty()) {
        const auto table = run_pairwise_comparison(rep, bench_alpha);
        detail::write_file(dir / "comparison.csv", [&](auto& o) { write_pairwise_csv(table, o); });
        detail::write_file(dir / "comparison.txt", [&](auto& o) { write_pairwise_text(table, o); });
      }
      if (!rep.failures.empty()) err << "error: " << rep.failures.size() << " cells failed, see failures.csv\n";
      return code;
    } else if (*cmp) {
      std::ifstream in(cmp_in, std::ios::binary);
      if (!in) throw DataError("cannot open '" + cmp_in + "'");
      const auto rep = read_raw_csv(in, cmp_in);
      const auto table = run_pairwise_comparison(rep, cmp_alpha, cmp_stat);
      detail::write_file(cmp_out, [&](auto& o) { write_pairwise_csv(table, o); });
      write_pairwise_text(table, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return usage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return data;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return data;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return internal;
  }
  return ok;
}

}  // namespace rfvi::cli
