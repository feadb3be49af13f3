#pragma once

// CART classification trees and random forests with three class-balancing
// regimes, plus out-of-bag bookkeeping on original-row identity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rfvi/dataset.hpp"
#include "rfvi/error.hpp"
#include "rfvi/parallel.hpp"
#include "rfvi/rng.hpp"

namespace rfvi {

enum class Sampling { none, under, over };

inline std::string_view to_string(Sampling s) {
  switch (s) {
    case Sampling::none: return "none";
    case Sampling::under: return "under";
    case Sampling::over: return "over";
  }
  return "?";
}

inline Sampling parse_sampling(std::string_view s) {
  if (s == "none") return Sampling::none;
  if (s == "under") return Sampling::under;
  if (s == "over") return Sampling::over;
  throw UsageError("unknown sampling mode '" + std::string(s) + "'");
}

/// Identity used for out-of-bag bookkeeping when the forest is trained on an
/// over-sampled table. `table_rows` treats every balanced-table row as its own
/// observation (a duplicated minority row is out-of-bag whenever that copy was
/// not drawn). `original_rows` maps copies back to their source row, which is
/// then out-of-bag only if no copy was drawn; at high imbalance this leaves
/// almost no minority rows out-of-bag. The rules coincide for none/under.
enum class OobRule { table_rows, original_rows };

inline std::string_view to_string(OobRule r) {
  return r == OobRule::table_rows ? "table" : "original";
}

inline OobRule parse_oob_rule(std::string_view s) {
  if (s == "table") return OobRule::table_rows;
  if (s == "original") return OobRule::original_rows;
  throw UsageError("unknown out-of-bag rule '" + std::string(s) + "'");
}

struct ForestConfig {
  std::size_t ntree = 200;
  std::size_t mtry = 0;  // 0 selects floor(sqrt(p))
  std::size_t min_leaf_size = 1;
  Sampling sampling = Sampling::none;
  Seed seed{};
  OobRule oob_rule = OobRule::table_rows;
  std::size_t threads = 1;  // does not affect results

  std::size_t resolved_mtry(std::size_t p) const {
    if (mtry != 0) return mtry;
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));
  }
};

struct TreeNode {
  std::int32_t variable = -1;  // -1 marks a leaf
  double threshold = 0;        // value <= threshold goes left
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t count0 = 0;  // training rows (with repeats) reaching the node
  std::uint32_t count1 = 0;
  double impurity_decrease = 0;  // Gini decrease weighted by node share of the sample

  bool is_leaf() const { return variable < 0; }
  double probability() const {
    return static_cast<double>(count1) / static_cast<double>(count0 + count1);
  }
};

struct Tree {
  std::vector<TreeNode> nodes;        // nodes[0] is the root
  std::vector<std::uint32_t> in_bag;  // training-table rows, with repeats
  std::vector<std::uint32_t> oob;     // out-of-bag rows, ascending (see Forest::oob_on_table)

  /// Leaf class-1 probability; `value(var)` supplies the row's features.
  template <typename ValueOf>
  double predict(ValueOf&& value) const {
    const TreeNode* node = &nodes[0];
    while (!node->is_leaf())
      node = &nodes[value(static_cast<std::size_t>(node->variable)) <= node->threshold
                        ? node->left
                        : node->right];
    return node->probability();
  }

  double predict(const Dataset& data, std::size_t row) const {
    return predict([&](std::size_t var) { return data.value(row, var); });
  }

  bool uses(std::size_t variable) const {
    return std::any_of(nodes.begin(), nodes.end(), [&](const TreeNode& n) {
      return n.variable == static_cast<std::int32_t>(variable);
    });
  }
};

struct Forest {
  std::vector<Tree> trees;
  ForestConfig config;
  std::vector<std::uint32_t> origin_map;  // training-table row -> original row
  std::size_t n_original = 0;
  std::size_t n_features = 0;

  /// Mean tree probability over all trees.
  double predict(const Dataset& data, std::size_t row) const {
    double s = 0;
    for (const auto& t : trees) s += t.predict(data, row);
    return s / static_cast<double>(trees.size());
  }

  /// True when out-of-bag indices refer to rows of the over-sampled table
  /// rather than to original rows.
  bool oob_on_table() const {
    return config.sampling == Sampling::over && config.oob_rule == OobRule::table_rows;
  }

  void check_shape(const Dataset& data) const {
    if (data.rows() != n_original || data.cols() != n_features)
      throw UsageError("dataset shape " + std::to_string(data.rows()) + "x" +
                       std::to_string(data.cols()) + " does not match forest shape " +
                       std::to_string(n_original) + "x" + std::to_string(n_features));
  }
};

struct BalancedTable {
  Dataset table;
  std::vector<std::uint32_t> origin_map;
};

/// Keeps every original row once and appends minority rows drawn with
/// replacement until both classes have n0 rows. Balanced input is returned
/// unchanged.
inline BalancedTable oversample_balance(const Dataset& data, Rng& rng) {
  const std::size_t n = data.rows();
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const std::uint8_t minority = data.count(1) <= data.count(0) ? 1 : 0;
  std::vector<std::size_t> minority_rows;
  for (std::size_t i = 0; i < n; ++i)
    if (data.label(i) == minority) minority_rows.push_back(i);
  const std::size_t deficit = n - 2 * minority_rows.size();
  for (std::size_t k = 0; k < deficit; ++k)
    rows.push_back(minority_rows[rng.uniform_index(minority_rows.size())]);
  std::vector<std::uint32_t> origin(rows.begin(), rows.end());
  if (deficit == 0) return {data, std::move(origin)};
  return {data.select_rows(rows), std::move(origin)};
}

struct TrainingSample {
  std::vector<std::uint32_t> in_bag;  // training-table rows, with repeats
  std::vector<std::uint32_t> oob;     // original rows with no copy in-bag
};

/// Bootstrap for one tree. `table` is the training table (the balanced table
/// in over mode), `origin_map` maps its rows to the `n_original` original rows.
///   none:  n draws with replacement from all rows
///   under: n1 draws with replacement from each class
///   over:  n0 draws with replacement from each class of the balanced table
inline TrainingSample draw_training_sample(const Dataset& table,
                                           std::span<const std::uint32_t> origin_map,
                                           std::size_t n_original, Sampling sampling, Rng& rng) {
  TrainingSample s;
  const std::size_t n = table.rows();
  if (sampling == Sampling::none) {
    s.in_bag.resize(n);
    for (auto& r : s.in_bag) r = static_cast<std::uint32_t>(rng.uniform_index(n));
  } else {
    std::vector<std::uint32_t> by_class[2];
    for (std::size_t i = 0; i < n; ++i)
      by_class[table.label(i)].push_back(static_cast<std::uint32_t>(i));
    const std::size_t per_class = sampling == Sampling::under
                                      ? std::min(by_class[0].size(), by_class[1].size())
                                      : std::max(by_class[0].size(), by_class[1].size());
    s.in_bag.reserve(2 * per_class);
    for (const auto& rows : by_class)
      for (std::size_t k = 0; k < per_class; ++k)
        s.in_bag.push_back(rows[rng.uniform_index(rows.size())]);
  }
  std::vector<char> hit(n_original, 0);
  for (auto r : s.in_bag) hit[origin_map[r]] = 1;
  for (std::size_t i = 0; i < n_original; ++i)
    if (!hit[i]) s.oob.push_back(static_cast<std::uint32_t>(i));
  return s;
}

namespace detail {

class TreeGrower {
 public:
  TreeGrower(const Dataset& table, std::size_t mtry, std::size_t min_leaf)
      : table_(table), mtry_(mtry), min_leaf_(min_leaf), vars_(table.cols()) {}

  std::vector<TreeNode> grow(std::span<const std::uint32_t> in_bag, Rng& rng) {
    sample_.assign(in_bag.begin(), in_bag.end());
    std::vector<TreeNode> nodes;
    const double total = static_cast<double>(sample_.size());
    struct Pending {
      std::uint32_t node, begin, end;
    };
    std::vector<Pending> stack;
    nodes.emplace_back();
    stack.push_back({0, 0, static_cast<std::uint32_t>(sample_.size())});
    while (!stack.empty()) {
      const Pending cur = stack.back();
      stack.pop_back();
      std::uint32_t c1 = 0;
      for (std::uint32_t i = cur.begin; i < cur.end; ++i) c1 += table_.label(sample_[i]);
      const std::uint32_t size = cur.end - cur.begin;
      nodes[cur.node].count0 = size - c1;
      nodes[cur.node].count1 = c1;
      if (c1 == 0 || c1 == size || size < 2 * min_leaf_) continue;

      const Split best = find_split(cur.begin, cur.end, c1, rng);
      if (best.variable < 0) continue;
      const double parent = weighted_gini(size - c1, c1);
      const double decrease = (parent - best.children) / total;
      if (!(decrease > 1e-12 * parent / total)) continue;

      const auto var = static_cast<std::size_t>(best.variable);
      auto mid = std::partition(sample_.begin() + cur.begin, sample_.begin() + cur.end,
                                [&](std::uint32_t r) { return table_.value(r, var) <= best.threshold; });
      const auto split_at = static_cast<std::uint32_t>(mid - sample_.begin());
      const auto left = static_cast<std::uint32_t>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      TreeNode& node = nodes[cur.node];
      node.variable = best.variable;
      node.threshold = best.threshold;
      node.left = left;
      node.right = left + 1;
      node.impurity_decrease = decrease;
      stack.push_back({left + 1, split_at, cur.end});
      stack.push_back({left, cur.begin, split_at});
    }
    return nodes;
  }

 private:
  struct Split {
    std::int32_t variable = -1;
    double threshold = 0;
    double children = std::numeric_limits<double>::infinity();
  };
  struct Entry {
    double value;
    std::uint8_t label;
  };

  // n * Gini(node) = 2 c0 c1 / n
  static double weighted_gini(std::uint32_t c0, std::uint32_t c1) {
    const double n = static_cast<double>(c0) + static_cast<double>(c1);
    return n > 0 ? 2.0 * static_cast<double>(c0) * static_cast<double>(c1) / n : 0.0;
  }

  Split find_split(std::uint32_t begin, std::uint32_t end, std::uint32_t c1, Rng& rng) {
    const std::size_t p = vars_.size();
    std::iota(vars_.begin(), vars_.end(), std::size_t{0});
    const std::size_t m = std::min(mtry_, p);
    for (std::size_t k = 0; k < m; ++k)
      std::swap(vars_[k], vars_[k + rng.uniform_index(p - k)]);
    std::sort(vars_.begin(), vars_.begin() + static_cast<std::ptrdiff_t>(m));

    const std::uint32_t size = end - begin;
    const std::uint32_t c0 = size - c1;
    Split best;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t var = vars_[k];
      const auto col = table_.column(var);
      buf_.resize(size);
      for (std::uint32_t i = 0; i < size; ++i)
        buf_[i] = {col[sample_[begin + i]], table_.label(sample_[begin + i])};
      std::sort(buf_.begin(), buf_.end(),
                [](const Entry& a, const Entry& b) { return a.value < b.value; });
      if (buf_.front().value == buf_.back().value) continue;
      std::uint32_t l0 = 0, l1 = 0;
      for (std::uint32_t i = 0; i + 1 < size; ++i) {
        (buf_[i].label ? l1 : l0) += 1;
        if (buf_[i].value == buf_[i + 1].value) continue;
        const std::uint32_t nl = i + 1;
        if (nl < min_leaf_ || size - nl < min_leaf_) continue;
        const double children = weighted_gini(l0, l1) + weighted_gini(c0 - l0, c1 - l1);
        if (children < best.children) {
          double thr = buf_[i].value + (buf_[i + 1].value - buf_[i].value) / 2.0;
          if (!(thr < buf_[i + 1].value)) thr = buf_[i].value;
          best = {static_cast<std::int32_t>(var), thr, children};
        }
      }
    }
    return best;
  }

  const Dataset& table_;
  std::size_t mtry_;
  std::size_t min_leaf_;
  std::vector<std::size_t> vars_;
  std::vector<std::uint32_t> sample_;
  std::vector<Entry> buf_;
};

}  // namespace detail

/// Grows one unpruned CART tree on `in_bag` rows of `table`. Each node tries
/// mtry variables drawn without replacement and keeps the split with the
/// lowest child Gini impurity; ties go to the lower variable index, then the
/// smaller threshold.
inline std::vector<TreeNode> grow_tree(const Dataset& table, std::span<const std::uint32_t> in_bag,
                                       std::size_t mtry, std::size_t min_leaf_size, Rng& rng) {
  detail::TreeGrower grower(table, mtry, min_leaf_size);
  return grower.grow(in_bag, rng);
}

inline Forest fit_forest(const Dataset& data, const ForestConfig& config) {
  if (config.ntree == 0) throw UsageError("ntree must be positive");
  if (config.min_leaf_size == 0) throw UsageError("min_leaf_size must be positive");
  const std::size_t mtry = config.resolved_mtry(data.cols());
  if (mtry > data.cols())
    throw UsageError("mtry " + std::to_string(mtry) + " exceeds the number of variables " +
                     std::to_string(data.cols()));

  Forest forest;
  forest.config = config;
  forest.n_original = data.rows();
  forest.n_features = data.cols();

  std::optional<Dataset> balanced;
  if (config.sampling == Sampling::over) {
    Rng rng(derive(config.seed, "oversample"));
    auto b = oversample_balance(data, rng);
    balanced.emplace(std::move(b.table));
    forest.origin_map = std::move(b.origin_map);
  } else {
    forest.origin_map.resize(data.rows());
    std::iota(forest.origin_map.begin(), forest.origin_map.end(), 0u);
  }
  const Dataset& table = balanced ? *balanced : data;
  std::vector<std::uint32_t> identity;
  if (forest.oob_on_table()) {
    identity.resize(table.rows());
    std::iota(identity.begin(), identity.end(), 0u);
  }
  const std::span<const std::uint32_t> oob_map =
      forest.oob_on_table() ? std::span<const std::uint32_t>(identity) : forest.origin_map;
  const std::size_t oob_rows = forest.oob_on_table() ? table.rows() : data.rows();

  forest.trees.resize(config.ntree);
  parallel_for(config.ntree, config.threads, [&](std::size_t t) {
    Rng rng(derive(config.seed, "tree", t));
    auto sample = draw_training_sample(table, oob_map, oob_rows, config.sampling, rng);
    Tree& tree = forest.trees[t];
    tree.nodes = grow_tree(table, sample.in_bag, mtry, config.min_leaf_size, rng);
    tree.in_bag = std::move(sample.in_bag);
    tree.oob = std::move(sample.oob);
  });
  return forest;
}

/// Rows that a forest's out-of-bag indices refer to: `data` itself, or its
/// over-sampled table rebuilt from the origin map.
class OobData {
 public:
  OobData(const Forest& forest, const Dataset& data) {
    forest.check_shape(data);
    if (forest.oob_on_table()) {
      std::vector<std::size_t> rows(forest.origin_map.begin(), forest.origin_map.end());
      owned_.emplace(data.select_rows(rows));
    }
    data_ = owned_ ? &*owned_ : &data;
  }
  const Dataset& operator*() const { return *data_; }
  const Dataset* operator->() const { return data_; }

 private:
  std::optional<Dataset> owned_;
  const Dataset* data_;
};

struct OobScores {
  std::vector<double> score;         // NaN where uncovered
  std::vector<std::uint32_t> votes;  // number of trees with the row out-of-bag
  std::vector<std::uint8_t> labels;

  bool covered(std::size_t i) const { return votes[i] > 0; }
  std::size_t uncovered_count() const {
    return static_cast<std::size_t>(std::count(votes.begin(), votes.end(), 0u));
  }
};

/// Mean out-of-bag tree probability for each row of the out-of-bag space
/// (original rows, or balanced-table rows; see OobRule).
inline OobScores oob_predictions(const Forest& forest, const Dataset& data) {
  const OobData eval(forest, data);
  const std::size_t n = eval->rows();
  OobScores out{std::vector<double>(n, 0.0), std::vector<std::uint32_t>(n, 0),
                std::vector<std::uint8_t>(eval->labels().begin(), eval->labels().end())};
  for (const auto& tree : forest.trees)
    for (auto i : tree.oob) {
      out.score[i] += tree.predict(*eval, i);
      ++out.votes[i];
    }
  for (std::size_t i = 0; i < n; ++i)
    out.score[i] = out.votes[i] ? out.score[i] / out.votes[i] : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace rfvi
