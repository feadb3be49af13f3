#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "rfvi/error.hpp"

namespace rfvi {

/// Area under the ROC curve as the Mann-Whitney statistic (ties count 1/2),
/// computed from average ranks in O(k log k).
inline double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw UsageError("auc: scores and labels differ in length");
  const std::size_t k = scores.size();
  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0;  // in units of half-ranks to stay integral
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i + 1;
    while (j < k && scores[order[j]] == scores[order[i]]) ++j;
    const double twice_avg_rank = static_cast<double>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        pos_rank_sum += twice_avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = k - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("auc: both classes are required");
  const double np = static_cast<double>(n_pos);
  const double u2 = pos_rank_sum - np * (np + 1.0);  // 2 * U
  return u2 / (2.0 * np * static_cast<double>(n_neg));
}

/// True when both labels occur.
inline bool has_both_classes(std::span<const std::uint8_t> labels) {
  bool seen0 = false, seen1 = false;
  for (auto y : labels) (y ? seen1 : seen0) = true;
  return seen0 && seen1;
}

/// Fraction of labels equal to [score > threshold].
inline double accuracy(std::span<const double> scores, std::span<const std::uint8_t> labels,
                       double threshold = 0.5) {
  if (scores.size() != labels.size())
    throw UsageError("accuracy: scores and labels differ in length");
  if (scores.empty()) throw UsageError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    hits += (scores[i] > threshold) == (labels[i] != 0);
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

}  // namespace rfvi
