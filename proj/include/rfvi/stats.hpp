#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "rfvi/error.hpp"

namespace rfvi {

enum class Alternative { two_sided, greater, less };

struct WilcoxonResult {
  double statistic = 0;  // W+, sum of ranks of positive differences
  double p_value = 1;
  std::size_t n_used = 0;  // nonzero differences
  bool exact = false;
  bool degenerate = false;  // every difference was zero
};

namespace detail {

/// Number of sign assignments of ranks 1..n giving each W+ value.
inline std::vector<std::uint64_t> signed_rank_counts(std::size_t n) {
  const std::size_t max_sum = n * (n + 1) / 2;
  std::vector<std::uint64_t> counts(max_sum + 1, 0);
  counts[0] = 1;
  for (std::size_t r = 1; r <= n; ++r)
    for (std::size_t s = max_sum; s >= r; --s) counts[s] += counts[s - r];
  return counts;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace detail

/// Paired Wilcoxon signed-rank test on d = x - y. Zero differences are
/// dropped and tied |d| get average ranks. With at most 12 nonzero
/// differences and no ties the null distribution is enumerated exactly;
/// otherwise a tie-corrected normal approximation with continuity correction
/// is used. `greater` tests whether x tends to exceed y.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                           Alternative alt) {
  if (x.size() != y.size()) throw UsageError("wilcoxon: samples differ in length");
  if (x.empty()) throw UsageError("wilcoxon: empty sample");
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) d.push_back(x[i] - y[i]);
  WilcoxonResult res;
  res.n_used = d.size();
  if (d.empty()) {
    res.degenerate = true;
    return res;
  }
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  double w_plus = 0, tie_term = 0;
  bool ties = false;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && std::abs(d[order[j]]) == std::abs(d[order[i]])) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    const double t = static_cast<double>(j - i);
    if (j - i > 1) ties = true;
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k)
      if (d[order[k]] > 0) w_plus += rank;
    i = j;
  }
  res.statistic = w_plus;

  double p_greater, p_less;
  const double nn = static_cast<double>(n);
  if (n <= 12 && !ties) {
    res.exact = true;
    const auto counts = detail::signed_rank_counts(n);
    const auto w = static_cast<std::size_t>(w_plus);
    std::uint64_t ge = 0, le = 0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (s >= w) ge += counts[s];
      if (s <= w) le += counts[s];
    }
    const double total = std::ldexp(1.0, static_cast<int>(n));
    p_greater = static_cast<double>(ge) / total;
    p_less = static_cast<double>(le) / total;
    if (alt == Alternative::greater) res.p_value = p_greater;
    else if (alt == Alternative::less) res.p_value = p_less;
    else res.p_value = std::min(1.0, 2.0 * std::min(p_greater, p_less));
    return res;
  }
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (!(var > 0)) {
    res.degenerate = true;
    return res;
  }
  const double sd = std::sqrt(var);
  const double diff = w_plus - mean;
  switch (alt) {
    case Alternative::greater:
      res.p_value = 1.0 - detail::normal_cdf((diff - 0.5) / sd);
      break;
    case Alternative::less:
      res.p_value = detail::normal_cdf((diff + 0.5) / sd);
      break;
    case Alternative::two_sided: {
      const double cc = diff > 0 ? 0.5 : (diff < 0 ? -0.5 : 0.0);
      const double z = (diff - cc) / sd;
      res.p_value = std::min(1.0, 2.0 * std::min(detail::normal_cdf(z), 1.0 - detail::normal_cdf(z)));
      break;
    }
  }
  res.p_value = std::clamp(res.p_value, 0.0, 1.0);
  return res;
}

enum class Effect { strong, moderate, weak, noise };

inline std::string_view to_string(Effect e) {
  switch (e) {
    case Effect::strong: return "strong";
    case Effect::moderate: return "moderate";
    case Effect::weak: return "weak";
    case Effect::noise: return "noise";
  }
  return "?";
}

/// True effect category of each variable plus the rank bands used to classify
/// by importance: ranks 1..band[0] are strong, the next band[1] moderate, etc.
struct EffectTruth {
  std::vector<Effect> category;
  std::array<std::size_t, 4> band_sizes{5, 5, 5, 15};

  /// Variables laid out block by block, as in the simulation design.
  static EffectTruth blocks(std::array<std::size_t, 4> sizes = {5, 5, 5, 15}) {
    EffectTruth t;
    t.band_sizes = sizes;
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t k = 0; k < sizes[b]; ++k) t.category.push_back(static_cast<Effect>(b));
    return t;
  }

  Effect band_of_rank(std::size_t rank) const {  // 0-based rank
    std::size_t edge = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      edge += band_sizes[b];
      if (rank < edge) return static_cast<Effect>(b);
    }
    return Effect::noise;
  }
};

struct MisclassificationCounts {
  std::size_t strong = 0;
  std::size_t moderate = 0;
  std::size_t weak = 0;
  std::size_t noise = 0;  // not part of the reported triple

  std::size_t total() const { return strong + moderate + weak; }
  friend bool operator==(const MisclassificationCounts&, const MisclassificationCounts&) = default;
};

/// Ranks variables by descending importance (ties by ascending index) and
/// counts, per true category, the variables whose rank band disagrees.
inline MisclassificationCounts rank_and_classify(std::span<const double> mean_importance,
                                                 const EffectTruth& truth) {
  if (mean_importance.size() != truth.category.size())
    throw UsageError("rank_and_classify: importance length does not match the truth vector");
  std::vector<std::size_t> order(mean_importance.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mean_importance[a] > mean_importance[b];
  });
  MisclassificationCounts c;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Effect actual = truth.category[order[rank]];
    if (truth.band_of_rank(rank) == actual) continue;
    switch (actual) {
      case Effect::strong: ++c.strong; break;
      case Effect::moderate: ++c.moderate; break;
      case Effect::weak: ++c.weak; break;
      case Effect::noise: ++c.noise; break;
    }
  }
  return c;
}

}  // namespace rfvi
