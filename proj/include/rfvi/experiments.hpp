#pragma once

// Experiment drivers: the Monte Carlo importance study, the cross-validated
// selection benchmark and the pairwise comparison of selectors.
//
// Every unit of work (one replicate of one cell) derives its own seed from the
// master seed, writes into its own slot, and is aggregated in a fixed order,
// so reports do not depend on the number of workers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "rfvi/csv.hpp"
#include "rfvi/dataset.hpp"
#include "rfvi/error.hpp"
#include "rfvi/forest.hpp"
#include "rfvi/importance.hpp"
#include "rfvi/metrics.hpp"
#include "rfvi/parallel.hpp"
#include "rfvi/rng.hpp"
#include "rfvi/selection.hpp"
#include "rfvi/stats.hpp"
#include "rfvi/synthgen.hpp"

namespace rfvi {

inline constexpr ImportanceMethod kAllImportanceMethods[] = {
    ImportanceMethod::gini, ImportanceMethod::perm_accu, ImportanceMethod::perm_auc,
    ImportanceMethod::perm_auc_under, ImportanceMethod::perm_auc_over};

struct ReportRow {
  std::string setting;
  std::string method;
  std::string statistic;
  double value = 0;
  double stderr_ = std::numeric_limits<double>::quiet_NaN();  // NaN when not applicable
};

struct RawRow {
  std::string setting;
  std::string method;
  std::size_t replicate = 0;
  std::string statistic;
  double value = 0;
};

struct QuantileRow {
  std::string setting;
  std::string method;
  std::string variable;
  Effect category = Effect::noise;
  std::array<double, 5> q{};  // min, 25%, median, 75%, max
};

struct Failure {
  std::string setting;
  std::string method;
  std::size_t replicate = 0;
  std::string message;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::vector<RawRow> raw;
  std::vector<QuantileRow> quantiles;
  std::vector<Failure> failures;

  std::optional<double> find(std::string_view setting, std::string_view method,
                             std::string_view statistic) const {
    for (const auto& r : rows)
      if (r.setting == setting && r.method == method && r.statistic == statistic) return r.value;
    return std::nullopt;
  }

  /// Per-replicate values of one statistic, in replicate order.
  std::vector<double> replicate_values(std::string_view setting, std::string_view method,
                                       std::string_view statistic) const {
    std::vector<std::pair<std::size_t, double>> v;
    for (const auto& r : raw)
      if (r.setting == setting && r.method == method && r.statistic == statistic)
        v.emplace_back(r.replicate, r.value);
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (auto& [_, x] : v) out.push_back(x);
    return out;
  }
};

namespace detail {

struct Moments {
  double mean = 0;
  double sd = 0;  // sample standard deviation, 0 for a single value
  double se = 0;
};

inline Moments moments(std::span<const double> v) {
  Moments m;
  if (v.empty()) return m;
  double s = 0;
  for (double x : v) s += x;
  m.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    m.se = m.sd / std::sqrt(static_cast<double>(v.size()));
  }
  return m;
}

/// Linear-interpolation quantile of sorted data (type 7).
inline double quantile_sorted(std::span<const double> sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline std::string number_label(double v) { return csv::format_double(v); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Monte Carlo study

struct MonteCarloConfig {
  std::vector<std::size_t> n_grid{50, 100, 250, 500};
  std::vector<double> ir_grid{1, 2, 10, 20};
  std::size_t replicates = 100;
  std::vector<ImportanceMethod> methods{std::begin(kAllImportanceMethods),
                                        std::end(kAllImportanceMethods)};
  ForestConfig forest;
  Seed seed{1};
  double u = 2.0;
  std::size_t workers = 1;

  void validate() const {
    if (n_grid.empty() || ir_grid.empty()) throw UsageError("Monte Carlo grids must be nonempty");
    if (methods.empty()) throw UsageError("Monte Carlo study needs at least one method");
    if (replicates < 1) throw UsageError("replicates must be at least 1");
    if (forest.ntree < 1) throw UsageError("ntree must be at least 1");
    for (auto n : n_grid)
      if (n < 10) throw UsageError("sample sizes must be at least 10");
    for (double ir : ir_grid)
      if (!(ir >= 1.0) || !std::isfinite(ir)) throw UsageError("imbalance ratios must be >= 1");
  }
};

inline std::string mc_setting(std::size_t n, double ir) {
  return "N=" + std::to_string(n) + " IR=" + detail::number_label(ir);
}

inline Seed mc_data_seed(Seed master, std::size_t n, double ir, std::size_t replicate) {
  return derive(master, "mc-data", n, std::llround(ir * 1000.0), replicate);
}

/// For every (N, IR, method): mean importance over replicates, ranked and
/// classified against the true effect blocks. Each replicate draws one data
/// set shared by all methods.
inline ExperimentReport run_monte_carlo(const MonteCarloConfig& cfg) {
  cfg.validate();
  const SimulationConfig base;
  const std::size_t p = base.features();
  const EffectTruth truth = EffectTruth::blocks(base.block_sizes);
  const std::size_t n_cells = cfg.n_grid.size() * cfg.ir_grid.size();
  const std::size_t n_methods = cfg.methods.size();
  const std::size_t reps = cfg.replicates;

  struct Slot {
    std::vector<double> importance;
    double achieved_ir = 0;
    std::optional<std::string> error;
  };
  std::vector<Slot> slots(n_cells * reps * n_methods);
  auto cell_n = [&](std::size_t c) { return cfg.n_grid[c / cfg.ir_grid.size()]; };
  auto cell_ir = [&](std::size_t c) { return cfg.ir_grid[c % cfg.ir_grid.size()]; };

  parallel_for(slots.size(), cfg.workers, [&](std::size_t i) {
    const std::size_t m = i % n_methods;
    const std::size_t r = (i / n_methods) % reps;
    const std::size_t c = i / (n_methods * reps);
    Slot& slot = slots[i];
    try {
      SimulationConfig sim = base;
      sim.total = cell_n(c);
      sim.imbalance = cell_ir(c);
      const Dataset data = gen_simulation(sim, mc_data_seed(cfg.seed, sim.total, sim.imbalance, r));
      ForestConfig fc = cfg.forest;
      fc.threads = 1;
      const auto method = cfg.methods[m];
      const auto rep = measure_importance(
          data, method, fc,
          derive(cfg.seed, "mc-importance", sim.total, std::llround(sim.imbalance * 1000.0), r,
                 static_cast<int>(method)),
          cfg.u);
      slot.importance = rep.values();
      slot.achieved_ir = imbalance_ratio(data);
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });

  ExperimentReport out;
  const std::vector<std::string> names = [&] {
    std::vector<std::string> v;
    for (std::size_t j = 0; j < p; ++j) v.push_back("X" + std::to_string(j + 1));
    return v;
  }();
  for (std::size_t c = 0; c < n_cells; ++c) {
    const std::string setting = mc_setting(cell_n(c), cell_ir(c));
    for (std::size_t m = 0; m < n_methods; ++m) {
      const std::string method(to_string(cfg.methods[m]));
      auto slot_at = [&](std::size_t r) -> const Slot& {
        return slots[(c * reps + r) * n_methods + m];
      };
      bool failed = false;
      for (std::size_t r = 0; r < reps; ++r)
        if (slot_at(r).error) {
          out.failures.push_back({setting, method, r, *slot_at(r).error});
          failed = true;
        }
      if (failed) continue;

      std::vector<double> mean_imp(p, 0.0);
      for (std::size_t r = 0; r < reps; ++r) {
        const Slot& s = slot_at(r);
        for (std::size_t j = 0; j < p; ++j) {
          mean_imp[j] += s.importance[j];
          out.raw.push_back({setting, method, r, "importance_" + names[j], s.importance[j]});
        }
      }
      for (double& v : mean_imp) v /= static_cast<double>(reps);
      const auto mis = rank_and_classify(mean_imp, truth);
      auto add = [&](const std::string& stat, double v, double se = std::numeric_limits<double>::quiet_NaN()) {
        out.rows.push_back({setting, method, stat, v, se});
      };
      add("misclassified_strong", static_cast<double>(mis.strong));
      add("misclassified_moderate", static_cast<double>(mis.moderate));
      add("misclassified_weak", static_cast<double>(mis.weak));
      add("misclassified_total", static_cast<double>(mis.total()));

      std::vector<double> irs;
      for (std::size_t r = 0; r < reps; ++r) irs.push_back(slot_at(r).achieved_ir);
      const auto ir_m = detail::moments(irs);
      add("achieved_ir", ir_m.mean, ir_m.se);

      for (std::size_t b = 0; b < 4; ++b) {
        std::vector<double> block_means;
        for (std::size_t r = 0; r < reps; ++r) {
          double s = 0;
          std::size_t k = 0;
          for (std::size_t j = 0; j < p; ++j)
            if (truth.category[j] == static_cast<Effect>(b)) {
              s += slot_at(r).importance[j];
              ++k;
            }
          block_means.push_back(s / static_cast<double>(k));
        }
        const auto bm = detail::moments(block_means);
        add("mean_" + std::string(to_string(static_cast<Effect>(b))), bm.mean, bm.se);
      }

      for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> v;
        for (std::size_t r = 0; r < reps; ++r) v.push_back(slot_at(r).importance[j]);
        std::sort(v.begin(), v.end());
        QuantileRow q{setting, method, names[j], truth.category[j], {}};
        const double probs[] = {0.0, 0.25, 0.5, 0.75, 1.0};
        for (std::size_t k = 0; k < 5; ++k) q.q[k] = detail::quantile_sorted(v, probs[k]);
        out.quantiles.push_back(std::move(q));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validated selection benchmark

struct DatasetSource {
  std::string name;
  std::optional<BenchmarkSpec> generator;  // set for generated data
  std::string path;                        // otherwise a CSV file
  std::string label = "y";
  std::string positive = "1";
  Encoding encoding = Encoding::one_hot;
};

struct CvBenchmarkConfig {
  std::vector<DatasetSource> datasets;
  std::vector<Selector> selectors{std::begin(kAllSelectors), std::end(kAllSelectors)};
  std::uint32_t folds = 5;
  std::size_t replicates = 50;
  ForestConfig forest;
  Seed seed{1};
  double u = 2.0;
  double drop_rate = 0.2;
  std::size_t workers = 1;

  void validate() const {
    if (datasets.empty()) throw UsageError("benchmark needs at least one dataset");
    if (selectors.empty()) throw UsageError("benchmark needs at least one selector");
    if (folds < 2) throw UsageError("folds must be at least 2");
    if (replicates < 1) throw UsageError("replicates must be at least 1");
    if (forest.ntree < 1) throw UsageError("ntree must be at least 1");
    std::set<std::string> seen;
    for (const auto& d : datasets)
      if (!seen.insert(d.name).second) throw UsageError("duplicate dataset name '" + d.name + "'");
  }
};

/// Loads or generates a benchmark data set. Generated data depend only on the
/// master seed and the data set's position in the configuration.
inline Dataset materialize(const DatasetSource& src, Seed master, std::size_t index) {
  if (src.generator) return gen_benchmark(*src.generator, derive(master, "dataset", index));
  return load_csv(src.path, src.label, src.positive, src.encoding).dataset;
}

struct FoldOutcome {
  double auc = 0;
  std::size_t n_candidates = 0;
  std::size_t selected_size = 0;
};

/// Selects on the training rows, fits an evaluation forest on the selected
/// columns with the selector's sampling mode and scores the held-out rows.
inline FoldOutcome evaluate_fold(const Dataset& train, const Dataset& test, Selector selector,
                                 const CvBenchmarkConfig& cfg, Seed seed) {
  ForestConfig fc = cfg.forest;
  fc.threads = 1;
  const auto sel = run_selector(train, selector, fc, derive(seed, "select"), cfg.u, cfg.drop_rate);
  const auto& vars = sel.best().variables;
  const Dataset sub_train = train.select_columns(vars);
  const Dataset sub_test = test.select_columns(vars);
  fc.sampling = selector_sampling(selector);
  fc.seed = derive(seed, "evaluate");
  if (fc.mtry > sub_train.cols()) fc.mtry = sub_train.cols();
  const Forest forest = fit_forest(sub_train, fc);
  std::vector<double> scores(sub_test.rows());
  for (std::size_t i = 0; i < sub_test.rows(); ++i) scores[i] = forest.predict(sub_test, i);
  return {auc(scores, sub_test.labels()), sel.n_candidates(), vars.size()};
}

/// Per replicate: fresh stratified folds; per fold: selection and evaluation
/// for every selector on the same split. CV-AUC is the mean held-out AUC.
inline ExperimentReport run_cv_benchmark(const CvBenchmarkConfig& cfg) {
  cfg.validate();
  const std::size_t n_data = cfg.datasets.size();
  const std::size_t n_sel = cfg.selectors.size();
  const std::size_t reps = cfg.replicates;
  const std::size_t k = cfg.folds;

  std::vector<std::optional<Dataset>> data(n_data);
  std::vector<std::string> data_error(n_data);
  for (std::size_t d = 0; d < n_data; ++d) {
    try {
      data[d] = materialize(cfg.datasets[d], cfg.seed, d);
      if (data[d]->count(1) < k || data[d]->count(0) < k)
        throw DataError("dataset '" + cfg.datasets[d].name + "' has a class with fewer rows than folds");
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      data[d].reset();
      data_error[d] = e.what();
    }
  }

  std::vector<FoldAssignment> assignments(n_data * reps);
  for (std::size_t d = 0; d < n_data; ++d)
    if (data[d])
      for (std::size_t r = 0; r < reps; ++r)
        assignments[d * reps + r] =
            stratified_kfold(*data[d], static_cast<std::uint32_t>(k), derive(cfg.seed, "folds", d, r));

  struct Slot {
    FoldOutcome outcome;
    std::optional<std::string> error;
  };
  std::vector<Slot> slots(n_data * reps * k * n_sel);
  parallel_for(slots.size(), cfg.workers, [&](std::size_t i) {
    const std::size_t s = i % n_sel;
    const std::size_t f = (i / n_sel) % k;
    const std::size_t r = (i / (n_sel * k)) % reps;
    const std::size_t d = i / (n_sel * k * reps);
    if (!data[d]) return;
    try {
      const auto& folds = assignments[d * reps + r];
      const auto fold = static_cast<std::uint32_t>(f + 1);
      const auto train_rows = folds.rows_not_in(fold);
      const auto test_rows = folds.rows_in(fold);
      const Dataset train = data[d]->select_rows(train_rows);
      const Dataset test = data[d]->select_rows(test_rows);
      slots[i].outcome = evaluate_fold(train, test, cfg.selectors[s], cfg,
                                       derive(cfg.seed, "cv-unit", d, r, f));
    } catch (const std::exception& e) {
      slots[i].error = e.what();
    }
  });

  ExperimentReport out;
  for (std::size_t d = 0; d < n_data; ++d) {
    const std::string& setting = cfg.datasets[d].name;
    for (std::size_t s = 0; s < n_sel; ++s) {
      const std::string method(to_string(cfg.selectors[s]));
      if (!data[d]) {
        out.failures.push_back({setting, method, 0, data_error[d]});
        continue;
      }
      bool failed = false;
      std::vector<double> cv_auc(reps), n_cand(reps), size(reps);
      for (std::size_t r = 0; r < reps; ++r) {
        double a = 0, c = 0, z = 0;
        for (std::size_t f = 0; f < k; ++f) {
          const Slot& slot = slots[((d * reps + r) * k + f) * n_sel + s];
          if (slot.error) {
            out.failures.push_back({setting, method, r, "fold " + std::to_string(f + 1) + ": " + *slot.error});
            failed = true;
            continue;
          }
          a += slot.outcome.auc;
          c += static_cast<double>(slot.outcome.n_candidates);
          z += static_cast<double>(slot.outcome.selected_size);
        }
        cv_auc[r] = a / static_cast<double>(k);
        n_cand[r] = c / static_cast<double>(k);
        size[r] = z / static_cast<double>(k);
      }
      if (failed) continue;
      for (std::size_t r = 0; r < reps; ++r) {
        out.raw.push_back({setting, method, r, "cv_auc", cv_auc[r]});
        out.raw.push_back({setting, method, r, "n_candidates", n_cand[r]});
        out.raw.push_back({setting, method, r, "selected_size", size[r]});
      }
      const auto am = detail::moments(cv_auc);
      out.rows.push_back({setting, method, "cv_auc", am.mean, am.se});
      out.rows.push_back({setting, method, "cv_auc_sd", am.sd, std::numeric_limits<double>::quiet_NaN()});
      const auto cm = detail::moments(n_cand);
      out.rows.push_back({setting, method, "n_candidates", cm.mean, cm.se});
      const auto zm = detail::moments(size);
      out.rows.push_back({setting, method, "selected_size", zm.mean, zm.se});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pairwise comparison

struct PairwiseCell {
  std::string row;
  std::string column;
  std::size_t wins = 0;         // a: data sets where the column method's mean is higher
  std::size_t significant = 0;  // b: wins with one-sided p < alpha
  std::size_t ties = 0;
  std::size_t untested = 0;     // wins whose data set had too few paired replicates
  double overall_p = 1.0;       // two-sided test over per-data-set means
};

struct PairwiseTable {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  std::vector<PairwiseCell> cells;  // every ordered pair with row != column
  double alpha = 0.05;

  const PairwiseCell& at(std::string_view row, std::string_view column) const {
    for (const auto& c : cells)
      if (c.row == row && c.column == column) return c;
    throw UsageError("no comparison between '" + std::string(row) + "' and '" + std::string(column) + "'");
  }
};

/// Compares methods on the per-replicate values of `statistic` in the raw rows.
inline PairwiseTable run_pairwise_comparison(const ExperimentReport& report, double alpha = 0.05,
                                             const std::string& statistic = "cv_auc") {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  PairwiseTable table;
  table.alpha = alpha;
  std::map<std::pair<std::string, std::string>, std::map<std::size_t, double>> values;
  for (const auto& r : report.raw) {
    if (r.statistic != statistic) continue;
    values[{r.setting, r.method}][r.replicate] = r.value;
    if (std::find(table.methods.begin(), table.methods.end(), r.method) == table.methods.end())
      table.methods.push_back(r.method);
    if (std::find(table.datasets.begin(), table.datasets.end(), r.setting) == table.datasets.end())
      table.datasets.push_back(r.setting);
  }
  if (table.methods.size() < 2) throw DataError("comparison needs per-replicate values for two methods");

  auto mean_of = [](const std::map<std::size_t, double>& m) {
    double s = 0;
    for (auto& [_, v] : m) s += v;
    return s / static_cast<double>(m.size());
  };
  for (const auto& row : table.methods)
    for (const auto& col : table.methods) {
      if (row == col) continue;
      PairwiseCell cell{row, col};
      std::vector<double> row_means, col_means;
      for (const auto& ds : table.datasets) {
        auto ri = values.find({ds, row});
        auto ci = values.find({ds, col});
        if (ri == values.end() || ci == values.end()) continue;
        const double rm = mean_of(ri->second), cm = mean_of(ci->second);
        row_means.push_back(rm);
        col_means.push_back(cm);
        if (cm == rm) ++cell.ties;
        if (!(cm > rm)) continue;
        ++cell.wins;
        std::vector<double> x, y;
        for (auto& [rep, v] : ci->second) {
          auto it = ri->second.find(rep);
          if (it == ri->second.end()) continue;
          x.push_back(v);
          y.push_back(it->second);
        }
        if (x.size() < 2) {
          ++cell.untested;
          continue;
        }
        const auto w = wilcoxon_signed_rank(x, y, Alternative::greater);
        if (!w.degenerate && w.p_value < alpha) ++cell.significant;
      }
      if (!col_means.empty()) {
        const auto w = wilcoxon_signed_rank(col_means, row_means, Alternative::two_sided);
        cell.overall_p = w.degenerate ? 1.0 : w.p_value;
      }
      table.cells.push_back(std::move(cell));
    }
  return table;
}

// ---------------------------------------------------------------------------
// Writers and readers

namespace detail {

inline std::string num_or_empty(double v) { return std::isnan(v) ? "" : csv::format_double(v); }

}  // namespace detail

template <typename Out>
void write_report_csv(const ExperimentReport& rep, Out& out) {
  out << "setting,method,statistic,value,stderr\n";
  for (const auto& r : rep.rows)
    out << csv::quote(r.setting) << ',' << csv::quote(r.method) << ',' << r.statistic << ','
        << csv::format_double(r.value) << ',' << detail::num_or_empty(r.stderr_) << '\n';
}

template <typename Out>
void write_raw_csv(const ExperimentReport& rep, Out& out) {
  out << "setting,method,replicate,statistic,value\n";
  for (const auto& r : rep.raw)
    out << csv::quote(r.setting) << ',' << csv::quote(r.method) << ',' << r.replicate + 1 << ','
        << r.statistic << ',' << csv::format_double(r.value) << '\n';
}

template <typename Out>
void write_quantiles_csv(const ExperimentReport& rep, Out& out) {
  out << "setting,method,variable,category,min,q25,median,q75,max\n";
  for (const auto& q : rep.quantiles) {
    out << csv::quote(q.setting) << ',' << csv::quote(q.method) << ',' << q.variable << ','
        << to_string(q.category);
    for (double v : q.q) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

template <typename Out>
void write_failures_csv(const ExperimentReport& rep, Out& out) {
  out << "setting,method,replicate,message\n";
  for (const auto& f : rep.failures)
    out << csv::quote(f.setting) << ',' << csv::quote(f.method) << ',' << f.replicate + 1 << ','
        << csv::quote(f.message) << '\n';
}

template <typename Out>
void write_pairwise_csv(const PairwiseTable& t, Out& out) {
  out << "row,column,wins,significant,ties,untested,datasets,overall_p\n";
  for (const auto& c : t.cells)
    out << csv::quote(c.row) << ',' << csv::quote(c.column) << ',' << c.wins << ',' << c.significant
        << ',' << c.ties << ',' << c.untested << ',' << t.datasets.size() << ','
        << csv::format_double(c.overall_p) << '\n';
}

/// Table-style text view of a comparison: "a(b)" per cell, '*' when the
/// overall test is significant.
template <typename Out>
void write_pairwise_text(const PairwiseTable& t, Out& out) {
  out << "column method wins over row method: a(b)\n";
  out << std::string(14, ' ');
  for (const auto& m : t.methods) out << ' ' << std::setw(12) << m;
  out << '\n';
  for (const auto& row : t.methods) {
    out << std::setw(14) << std::left << row << std::right;
    for (const auto& col : t.methods) {
      std::string cell = "-";
      if (row != col) {
        const auto& c = t.at(row, col);
        cell = std::to_string(c.wins) + "(" + std::to_string(c.significant) + ")" +
               (c.overall_p < t.alpha ? "*" : "");
      }
      out << ' ' << std::setw(12) << cell;
    }
    out << '\n';
  }
}

/// Mis-classification counts laid out like the simulation table.
template <typename Out>
void write_misclassification_text(const ExperimentReport& rep, Out& out) {
  std::vector<std::string> settings, methods;
  for (const auto& r : rep.rows) {
    if (std::find(settings.begin(), settings.end(), r.setting) == settings.end()) settings.push_back(r.setting);
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
  }
  out << std::left << std::setw(16) << "setting" << std::setw(16) << "method"
      << "strong moderate weak\n";
  for (const auto& s : settings)
    for (const auto& m : methods) {
      auto st = rep.find(s, m, "misclassified_strong");
      if (!st) continue;
      out << std::setw(16) << s << std::setw(16) << m << std::setw(7) << *st << std::setw(9)
          << *rep.find(s, m, "misclassified_moderate") << *rep.find(s, m, "misclassified_weak")
          << '\n';
    }
  out << std::right;
}

/// Reads the raw per-replicate CSV written by write_raw_csv.
inline ExperimentReport read_raw_csv(std::istream& in, const std::string& source = "<stream>") {
  auto records = csv::parse(in);
  if (records.empty()) throw DataError(source + ": empty file");
  const auto& header = records.front();
  auto col = [&](std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (csv::trim(header[i]) == name) return i;
    throw DataError(source + ": missing column '" + std::string(name) + "'");
  };
  const auto cs = col("setting"), cm = col("method"), cr = col("replicate"), ct = col("statistic"),
             cv = col("value");
  ExperimentReport rep;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() == 1 && csv::trim(rec[0]).empty()) continue;
    if (rec.size() != header.size())
      throw DataError(source + ": row " + std::to_string(i + 1) + " has the wrong number of fields");
    const auto value = csv::parse_number(rec[cv]);
    const auto replicate = csv::parse_number(rec[cr]);
    if (!value || !replicate || *replicate < 1 || *replicate != std::floor(*replicate))
      throw DataError(source + ": row " + std::to_string(i + 1) + " has a bad number");
    rep.raw.push_back({std::string(csv::trim(rec[cs])), std::string(csv::trim(rec[cm])),
                       static_cast<std::size_t>(*replicate) - 1, std::string(csv::trim(rec[ct])),
                       *value});
  }
  return rep;
}

inline nlohmann::json report_summary_json(const ExperimentReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    nlohmann::json j{{"setting", r.setting}, {"method", r.method}, {"statistic", r.statistic},
                     {"value", r.value}};
    j["stderr"] = std::isnan(r.stderr_) ? nlohmann::json(nullptr) : nlohmann::json(r.stderr_);
    rows.push_back(std::move(j));
  }
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : rep.failures)
    failures.push_back({{"setting", f.setting}, {"method", f.method}, {"replicate", f.replicate + 1},
                        {"message", f.message}});
  return {{"rows", rows}, {"failures", failures}};
}

}  // namespace rfvi
