#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rfvi/error.hpp"
#include "rfvi/rng.hpp"

namespace rfvi {

/// Binary-labelled numeric data. Label 1 is the minority (positive) class by
/// convention. Features are stored column-major.
class Dataset {
 public:
  Dataset(std::size_t n_rows, std::vector<double> column_major,
          std::vector<std::uint8_t> labels, std::vector<std::string> names)
      : n_(n_rows),
        values_(std::move(column_major)),
        labels_(std::move(labels)),
        names_(std::move(names)) {
    validate();
  }

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return names_.size(); }

  double value(std::size_t row, std::size_t col) const { return values_[col * n_ + row]; }

  std::span<const double> column(std::size_t col) const {
    return {values_.data() + col * n_, n_};
  }

  std::span<const std::uint8_t> labels() const { return labels_; }
  std::uint8_t label(std::size_t row) const { return labels_[row]; }

  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t col) const { return names_[col]; }

  std::size_t count(std::uint8_t label) const { return label ? n1_ : n_ - n1_; }

  /// Copy restricted to `cols`, in the given order.
  Dataset select_columns(std::span<const std::size_t> cols) const {
    std::vector<double> v;
    v.reserve(cols.size() * n_);
    std::vector<std::string> names;
    for (std::size_t c : cols) {
      if (c >= this->cols()) throw UsageError("column index " + std::to_string(c) + " out of range");
      auto src = column(c);
      v.insert(v.end(), src.begin(), src.end());
      names.push_back(names_[c]);
    }
    return Dataset(n_, std::move(v), labels_, std::move(names));
  }

  /// Copy restricted to `rows` (duplicates allowed), in the given order.
  Dataset select_rows(std::span<const std::size_t> rows) const {
    std::vector<double> v;
    v.reserve(rows.size() * cols());
    for (std::size_t c = 0; c < cols(); ++c) {
      auto src = column(c);
      for (std::size_t r : rows) v.push_back(src[r]);
    }
    std::vector<std::uint8_t> y;
    y.reserve(rows.size());
    for (std::size_t r : rows) y.push_back(labels_[r]);
    return Dataset(rows.size(), std::move(v), std::move(y), names_);
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.n_ == b.n_ && a.values_ == b.values_ && a.labels_ == b.labels_ &&
           a.names_ == b.names_;
  }

 private:
  void validate() {
    if (n_ < 2) throw DataError("dataset needs at least 2 rows");
    if (names_.empty()) throw DataError("dataset needs at least 1 feature");
    if (values_.size() != n_ * names_.size())
      throw DataError("feature matrix size does not match rows x columns");
    if (labels_.size() != n_) throw DataError("label vector length does not match row count");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]))
        throw DataError("non-finite value in column '" + names_[i / n_] + "', row " +
                        std::to_string(i % n_ + 1));
    }
    n1_ = 0;
    for (auto y : labels_) {
      if (y > 1) throw DataError("labels must be 0 or 1");
      n1_ += y;
    }
    if (n1_ == 0 || n1_ == n_) throw DataError("both classes must be present");
    std::unordered_set<std::string> seen;
    for (const auto& s : names_)
      if (!seen.insert(s).second) throw DataError("duplicate feature name '" + s + "'");
  }

  std::size_t n_;
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::string> names_;
  std::size_t n1_ = 0;
};

/// n0 / n1.
inline double imbalance_ratio(const Dataset& data) {
  return static_cast<double>(data.count(0)) / static_cast<double>(data.count(1));
}

struct FoldAssignment {
  std::vector<std::uint32_t> fold_of;  // values in 1..k
  std::uint32_t k = 0;

  std::vector<std::size_t> rows_in(std::uint32_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> rows_not_in(std::uint32_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] != fold) out.push_back(i);
    return out;
  }
};

/// Stratified k-fold assignment. Each class is shuffled and dealt round-robin;
/// the minority deal continues where the majority deal stopped so that fold
/// sizes also differ by at most one.
inline FoldAssignment stratified_kfold(const Dataset& data, std::uint32_t k, Seed seed) {
  if (k < 2 || k > data.rows() / 2)
    throw UsageError("fold count " + std::to_string(k) + " out of range [2, " +
                     std::to_string(data.rows() / 2) + "]");
  FoldAssignment out{std::vector<std::uint32_t>(data.rows(), 0), k};
  Rng rng(derive(seed, "stratified-kfold"));
  std::uint32_t next = 0;
  for (std::uint8_t cls : {std::uint8_t{0}, std::uint8_t{1}}) {
    std::vector<std::uint32_t> idx;
    for (std::size_t i = 0; i < data.rows(); ++i)
      if (data.label(i) == cls) idx.push_back(static_cast<std::uint32_t>(i));
    rng.shuffle(std::span<std::uint32_t>(idx));
    for (auto i : idx) {
      out.fold_of[i] = next + 1;
      next = (next + 1) % k;
    }
  }
  return out;
}

}  // namespace rfvi
