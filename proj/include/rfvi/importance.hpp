#pragma once

// Random-forest variable importance: mean Gini decrease, and out-of-bag
// permutation importance under accuracy or AUC, with per-variable confidence
// intervals mean(d) +/- u * sd(d) / sqrt(trees) over per-tree differences d.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfvi/csv.hpp"
#include "rfvi/dataset.hpp"
#include "rfvi/error.hpp"
#include "rfvi/forest.hpp"
#include "rfvi/metrics.hpp"
#include "rfvi/parallel.hpp"
#include "rfvi/rng.hpp"

namespace rfvi {

enum class ImportanceMethod { gini, perm_accu, perm_auc, perm_auc_under, perm_auc_over };

inline std::string_view to_string(ImportanceMethod m) {
  switch (m) {
    case ImportanceMethod::gini: return "gini";
    case ImportanceMethod::perm_accu: return "perm-accu";
    case ImportanceMethod::perm_auc: return "perm-auc";
    case ImportanceMethod::perm_auc_under: return "perm-auc-under";
    case ImportanceMethod::perm_auc_over: return "perm-auc-over";
  }
  return "?";
}

inline ImportanceMethod parse_importance_method(std::string_view s) {
  for (auto m : {ImportanceMethod::gini, ImportanceMethod::perm_accu, ImportanceMethod::perm_auc,
                 ImportanceMethod::perm_auc_under, ImportanceMethod::perm_auc_over})
    if (s == to_string(m)) return m;
  throw UsageError("unknown importance method '" + std::string(s) + "'");
}

inline Sampling required_sampling(ImportanceMethod m) {
  switch (m) {
    case ImportanceMethod::perm_auc_under: return Sampling::under;
    case ImportanceMethod::perm_auc_over: return Sampling::over;
    default: return Sampling::none;
  }
}

enum class PermutationMetric { accuracy, auc };

struct ImportanceRecord {
  std::size_t variable = 0;
  double value = 0;
  std::vector<double> per_tree_diffs;  // one per tree, NaN for skipped trees; empty for Gini
  double ci_lower = 0;
  double ci_upper = 0;
  std::size_t skipped_trees = 0;
  bool computable = true;            // false when every tree was skipped
  bool degenerate_interval = false;  // fewer than two retained trees

  std::vector<double> retained_diffs() const {
    std::vector<double> out;
    for (double d : per_tree_diffs)
      if (!std::isnan(d)) out.push_back(d);
    return out;
  }
};

struct ImportanceReport {
  ImportanceMethod method = ImportanceMethod::gini;
  std::vector<ImportanceRecord> records;
  std::vector<std::string> names;
  ForestConfig forest_config;
  double u = 2.0;

  std::vector<double> values() const {
    std::vector<double> v;
    for (const auto& r : records) v.push_back(r.value);
    return v;
  }
};

struct Interval {
  double mean = 0;
  double lower = 0;
  double upper = 0;
  bool degenerate = false;
};

/// mean(diffs) +/- u * sd(diffs) / sqrt(retained), sd being the sample
/// standard deviation. Fewer than two values give [mean, mean], flagged.
inline Interval importance_interval(std::span<const double> diffs, double u,
                                    std::size_t ntree_retained) {
  if (diffs.empty()) throw UsageError("importance_interval: no per-tree differences");
  if (ntree_retained == 0) throw UsageError("importance_interval: no retained trees");
  bool constant = true;
  double sum = 0;
  for (double d : diffs) {
    sum += d;
    constant = constant && d == diffs[0];
  }
  Interval out;
  out.mean = constant ? diffs[0] : sum / static_cast<double>(diffs.size());
  if (diffs.size() < 2) {
    out.lower = out.upper = out.mean;
    out.degenerate = true;
    return out;
  }
  double ss = 0;
  if (!constant)
    for (double d : diffs) ss += (d - out.mean) * (d - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(diffs.size() - 1));
  const double half = u * sd / std::sqrt(static_cast<double>(ntree_retained));
  out.lower = out.mean - half;
  out.upper = out.mean + half;
  return out;
}

inline Interval importance_interval(const ImportanceRecord& record, double u,
                                    std::size_t ntree_retained) {
  auto d = record.retained_diffs();
  return importance_interval(d, u, ntree_retained);
}

/// Mean over trees of the weighted Gini decreases of nodes splitting on each
/// variable. Interval bounds equal the value.
inline ImportanceReport gini_importance(const Forest& forest, std::vector<std::string> names = {}) {
  ImportanceReport rep;
  rep.method = ImportanceMethod::gini;
  rep.forest_config = forest.config;
  rep.names = std::move(names);
  std::vector<double> sum(forest.n_features, 0.0);
  for (const auto& tree : forest.trees)
    for (const auto& node : tree.nodes)
      if (!node.is_leaf()) sum[static_cast<std::size_t>(node.variable)] += node.impurity_decrease;
  for (std::size_t j = 0; j < forest.n_features; ++j) {
    ImportanceRecord r;
    r.variable = j;
    r.value = sum[j] / static_cast<double>(forest.trees.size());
    r.ci_lower = r.ci_upper = r.value;
    rep.records.push_back(std::move(r));
  }
  return rep;
}

/// The permutation applied to tree `tree`'s out-of-bag rows for `variable`.
inline std::vector<std::uint32_t> oob_permutation(Seed seed, std::size_t tree, std::size_t variable,
                                                  std::size_t oob_size) {
  Rng rng(derive(seed, "permute", tree, variable));
  return rng.permutation(oob_size);
}

inline double evaluate(PermutationMetric metric, std::span<const double> scores,
                       std::span<const std::uint8_t> labels) {
  return metric == PermutationMetric::auc ? auc(scores, labels) : accuracy(scores, labels);
}

/// metric(original) - metric(permuted) for one tree, where the permuted run
/// gives oob row k the value of `variable` from oob row perm[k].
inline double permuted_metric_difference(const Tree& tree, const Dataset& data,
                                         std::span<const std::uint32_t> oob,
                                         std::size_t variable,
                                         std::span<const std::uint32_t> perm,
                                         PermutationMetric metric) {
  const std::size_t m = oob.size();
  std::vector<double> original(m), permuted(m);
  std::vector<std::uint8_t> labels(m);
  const auto col = data.column(variable);
  for (std::size_t k = 0; k < m; ++k) {
    labels[k] = data.label(oob[k]);
    original[k] = tree.predict(data, oob[k]);
    const double swapped = col[oob[perm[k]]];
    permuted[k] = tree.predict([&](std::size_t var) {
      return var == variable ? swapped : data.value(oob[k], var);
    });
  }
  return evaluate(metric, original, labels) - evaluate(metric, permuted, labels);
}

/// Out-of-bag permutation importance. One permutation per (tree, variable),
/// drawn from a stream derived from `seed`. For the AUC metric, trees whose
/// out-of-bag rows hold a single class are skipped. Over-sampled forests are
/// evaluated in their out-of-bag space (see OobRule).
inline ImportanceReport permutation_importance(const Forest& forest, const Dataset& data,
                                               PermutationMetric metric, Seed seed, double u = 2.0,
                                               std::size_t threads = 1) {
  const OobData eval_rows(forest, data);
  const Dataset& eval = *eval_rows;
  const std::size_t ntree = forest.trees.size();
  const std::size_t p = data.cols();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> diffs(ntree, std::vector<double>(p, nan));

  parallel_for(ntree, threads, [&](std::size_t t) {
    const Tree& tree = forest.trees[t];
    const auto& oob = tree.oob;
    const std::size_t m = oob.size();
    if (m == 0) return;
    std::vector<std::uint8_t> labels(m);
    std::vector<double> original(m), permuted(m);
    for (std::size_t k = 0; k < m; ++k) {
      labels[k] = eval.label(oob[k]);
      original[k] = tree.predict(eval, oob[k]);
    }
    if (metric == PermutationMetric::auc && !has_both_classes(labels)) return;
    const double base = evaluate(metric, original, labels);
    std::vector<char> used(p, 0);
    for (const auto& node : tree.nodes)
      if (!node.is_leaf()) used[static_cast<std::size_t>(node.variable)] = 1;
    for (std::size_t j = 0; j < p; ++j) {
      if (!used[j]) {
        diffs[t][j] = 0.0;
        continue;
      }
      const auto perm = oob_permutation(seed, t, j, m);
      const auto col = eval.column(j);
      for (std::size_t k = 0; k < m; ++k) {
        const double swapped = col[oob[perm[k]]];
        const std::size_t row = oob[k];
        permuted[k] = tree.predict(
            [&](std::size_t var) { return var == j ? swapped : eval.value(row, var); });
      }
      diffs[t][j] = base - evaluate(metric, permuted, labels);
    }
  });

  ImportanceReport rep;
  rep.method = metric == PermutationMetric::auc ? ImportanceMethod::perm_auc
                                                : ImportanceMethod::perm_accu;
  if (metric == PermutationMetric::auc && forest.config.sampling == Sampling::under)
    rep.method = ImportanceMethod::perm_auc_under;
  if (metric == PermutationMetric::auc && forest.config.sampling == Sampling::over)
    rep.method = ImportanceMethod::perm_auc_over;
  rep.names = data.names();
  rep.forest_config = forest.config;
  rep.u = u;
  for (std::size_t j = 0; j < p; ++j) {
    ImportanceRecord r;
    r.variable = j;
    r.per_tree_diffs.resize(ntree);
    for (std::size_t t = 0; t < ntree; ++t) r.per_tree_diffs[t] = diffs[t][j];
    const auto kept = r.retained_diffs();
    r.skipped_trees = ntree - kept.size();
    if (kept.empty()) {
      r.computable = false;
      r.degenerate_interval = true;
    } else {
      const auto ci = importance_interval(kept, u, kept.size());
      r.value = ci.mean;
      r.ci_lower = ci.lower;
      r.ci_upper = ci.upper;
      r.degenerate_interval = ci.degenerate;
    }
    rep.records.push_back(std::move(r));
  }
  return rep;
}

/// Trains the forest a method calls for (sampling mode forced by the method)
/// and computes its importance. The forest seed and permutation seed are
/// derived from `seed`. If `forest_out` is given, the trained forest is moved there.
inline ImportanceReport measure_importance(const Dataset& data, ImportanceMethod method,
                                           ForestConfig config, Seed seed, double u = 2.0,
                                           Forest* forest_out = nullptr) {
  config.sampling = required_sampling(method);
  config.seed = derive(seed, "forest");
  Forest forest = fit_forest(data, config);
  ImportanceReport rep =
      method == ImportanceMethod::gini
          ? gini_importance(forest, data.names())
          : permutation_importance(forest, data,
                                   method == ImportanceMethod::perm_accu ? PermutationMetric::accuracy
                                                                         : PermutationMetric::auc,
                                   derive(seed, "permutation"), u, config.threads);
  rep.method = method;
  rep.u = u;
  if (forest_out) *forest_out = std::move(forest);
  return rep;
}

/// CSV with columns variable,name,method,value,ci_lower,ci_upper,skipped_trees.
/// `variable` is the 1-based column index.
template <typename Out>
void write_importance_csv(const ImportanceReport& rep, Out& out) {
  out << "variable,name,method,value,ci_lower,ci_upper,skipped_trees\n";
  const auto num = [](double v) { return csv::format_double(v); };
  for (const auto& r : rep.records) {
    const std::string name =
        r.variable < rep.names.size() ? rep.names[r.variable] : "X" + std::to_string(r.variable + 1);
    out << r.variable + 1 << ',' << csv::quote(name) << ',' << to_string(rep.method) << ',' << num(r.value)
        << ',' << num(r.ci_lower) << ',' << num(r.ci_upper) << ',' << r.skipped_trees << '\n';
  }
}

}  // namespace rfvi
