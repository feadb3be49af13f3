#pragma once

// Variable selection from random-forest importance.
//
// The interval-driven selector sorts variables by importance and walks pivots
// from the least important variable upward: the next pivot is the last
// variable whose interval lower bound lies strictly above the current pivot's
// upper bound. Each pivot closes a nested candidate set; every candidate is
// scored by out-of-bag AUC of a fresh forest restricted to it and the best
// score wins. Two backward-elimination baselines (drop a fixed share of the
// least important variables per step) are provided for comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rfvi/dataset.hpp"
#include "rfvi/error.hpp"
#include "rfvi/forest.hpp"
#include "rfvi/importance.hpp"
#include "rfvi/metrics.hpp"
#include "rfvi/rng.hpp"

namespace rfvi {

enum class Selector { diaz_uri, calle, auc, auc_under, auc_over };

inline constexpr Selector kAllSelectors[] = {Selector::diaz_uri, Selector::calle, Selector::auc,
                                             Selector::auc_under, Selector::auc_over};

inline std::string_view to_string(Selector s) {
  switch (s) {
    case Selector::diaz_uri: return "diaz-uri";
    case Selector::calle: return "calle";
    case Selector::auc: return "auc";
    case Selector::auc_under: return "auc-under";
    case Selector::auc_over: return "auc-over";
  }
  return "?";
}

inline Selector parse_selector(std::string_view s) {
  for (auto sel : kAllSelectors)
    if (s == to_string(sel)) return sel;
  throw UsageError("unknown selection method '" + std::string(s) + "'");
}

/// Sampling mode of the forests a selector trains (and of its final model).
inline Sampling selector_sampling(Selector s) {
  switch (s) {
    case Selector::auc_under: return Sampling::under;
    case Selector::auc_over: return Sampling::over;
    default: return Sampling::none;
  }
}

enum class CandidateScore { oob_auc, oob_error };

inline std::string_view to_string(CandidateScore s) {
  return s == CandidateScore::oob_auc ? "oob_auc" : "oob_error";
}

struct CandidateSet {
  std::vector<std::size_t> variables;  // importance order, most important first
  std::size_t pivot = 0;               // least important member
  std::optional<double> score;         // unset when unscorable
};

struct SelectionResult {
  Selector method = Selector::auc;
  CandidateScore score_kind = CandidateScore::oob_auc;
  std::vector<CandidateSet> candidates;
  std::size_t optimal = 0;
  bool optimal_scored = true;  // false when no candidate could be scored
  ImportanceReport importance_report;

  std::size_t n_candidates() const { return candidates.size(); }
  const CandidateSet& best() const { return candidates.at(optimal); }
};

/// Variable indices by descending importance, ties by ascending index.
inline std::vector<std::size_t> importance_order(const ImportanceReport& rep) {
  std::vector<std::size_t> order(rep.records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rep.records[a].value > rep.records[b].value;
  });
  for (auto& o : order) o = rep.records[o].variable;
  return order;
}

/// Search stage. Candidate i is the importance-sorted prefix ending at its
/// pivot. The walk stops once the most important variable's lower bound is
/// not above the current pivot's upper bound. If `notes` is given, a stop
/// where some lower-ranked variable still clears the pivot is reported there.
inline std::vector<CandidateSet> search_candidates(const ImportanceReport& rep,
                                                   std::vector<std::string>* notes = nullptr) {
  if (rep.records.empty()) throw UsageError("search_candidates: empty importance report");
  std::vector<std::size_t> pos(rep.records.size());
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  std::stable_sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
    return rep.records[a].value > rep.records[b].value;
  });
  auto lower = [&](std::size_t k) { return rep.records[pos[k]].ci_lower; };
  auto upper = [&](std::size_t k) { return rep.records[pos[k]].ci_upper; };
  auto make = [&](std::size_t pivot) {
    CandidateSet c;
    for (std::size_t k = 0; k <= pivot; ++k) c.variables.push_back(rep.records[pos[k]].variable);
    c.pivot = c.variables.back();
    return c;
  };

  std::vector<CandidateSet> out;
  std::size_t pivot = pos.size() - 1;
  out.push_back(make(pivot));
  while (lower(0) > upper(pivot)) {
    std::size_t next = 0;
    for (std::size_t k = pivot; k-- > 0;)
      if (lower(k) > upper(pivot)) {
        next = k;
        break;
      }
    pivot = next;
    out.push_back(make(pivot));
  }
  if (notes && pivot > 0) {
    for (std::size_t k = 1; k < pivot; ++k)
      if (lower(k) > upper(pivot)) {
        notes->push_back("search stopped at pivot rank " + std::to_string(pivot + 1) +
                         " although rank " + std::to_string(k + 1) +
                         " has a lower bound above its upper bound");
        break;
      }
  }
  return out;
}

/// Seed of the forest that scores a candidate of the given size.
inline Seed candidate_seed(Seed seed, std::size_t size) { return derive(seed, "candidate", size); }

/// Scores one variable subset by the out-of-bag AUC (or error) of a fresh
/// forest restricted to it. Rows out-of-bag for no tree are left out.
inline std::optional<double> score_subset(const Dataset& data, std::span<const std::size_t> vars,
                                          Sampling sampling, ForestConfig config, Seed seed,
                                          CandidateScore kind) {
  const Dataset sub = data.select_columns(vars);
  config.sampling = sampling;
  if (config.mtry > sub.cols()) config.mtry = sub.cols();
  config.seed = seed;
  const Forest forest = fit_forest(sub, config);
  const OobScores oob = oob_predictions(forest, sub);
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (std::size_t i = 0; i < oob.score.size(); ++i)
    if (oob.covered(i)) {
      scores.push_back(oob.score[i]);
      labels.push_back(oob.labels[i]);
    }
  if (kind == CandidateScore::oob_error) {
    if (scores.empty()) return std::nullopt;
    return 1.0 - accuracy(scores, labels);
  }
  if (!has_both_classes(labels)) return std::nullopt;
  return auc(scores, labels);
}

/// Scoring stage; candidate forests use seeds derived from `seed` and the
/// candidate size.
inline std::vector<CandidateSet> score_candidates(const Dataset& data,
                                                  std::vector<CandidateSet> candidates,
                                                  Sampling sampling, const ForestConfig& config,
                                                  Seed seed,
                                                  CandidateScore kind = CandidateScore::oob_auc) {
  if (candidates.empty()) throw UsageError("score_candidates: no candidates");
  for (auto& c : candidates)
    c.score = score_subset(data, c.variables, sampling, config,
                           candidate_seed(seed, c.variables.size()), kind);
  return candidates;
}

/// Index of the best scored candidate; ties go to the later (smaller) set.
inline std::optional<std::size_t> best_candidate(const std::vector<CandidateSet>& cands,
                                                 CandidateScore kind) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!cands[i].score) continue;
    const double s = *cands[i].score;
    if (!best) {
      best = i;
      continue;
    }
    const double b = *cands[*best].score;
    const bool better = kind == CandidateScore::oob_auc ? s > b : s < b;
    if (better || (s == b && cands[i].variables.size() < cands[*best].variables.size())) best = i;
  }
  return best;
}

namespace detail {

inline void finish(SelectionResult& res) {
  auto best = best_candidate(res.candidates, res.score_kind);
  res.optimal_scored = best.has_value();
  res.optimal = best.value_or(0);
}

}  // namespace detail

/// Interval-driven selection with the permutation-AUC importance matching
/// `method` (auc, auc-under or auc-over).
inline SelectionResult select_optimal(const Dataset& data, Selector method,
                                      const ForestConfig& config, Seed seed, double u = 2.0,
                                      std::vector<std::string>* notes = nullptr) {
  ImportanceMethod imp;
  switch (method) {
    case Selector::auc: imp = ImportanceMethod::perm_auc; break;
    case Selector::auc_under: imp = ImportanceMethod::perm_auc_under; break;
    case Selector::auc_over: imp = ImportanceMethod::perm_auc_over; break;
    default: throw UsageError("select_optimal takes auc, auc-under or auc-over");
  }
  SelectionResult res;
  res.method = method;
  res.score_kind = CandidateScore::oob_auc;
  res.importance_report = measure_importance(data, imp, config, derive(seed, "importance"), u);
  res.candidates = score_candidates(data, search_candidates(res.importance_report, notes),
                                    selector_sampling(method), config, derive(seed, "scoring"));
  detail::finish(res);
  return res;
}

/// Sizes p, floor((1 - rate) p), ... ending with the first size <= 2 (never below 2).
inline std::vector<std::size_t> backward_sizes(std::size_t p, double drop_rate) {
  if (!(drop_rate > 0.0 && drop_rate < 1.0)) throw UsageError("drop rate must lie in (0, 1)");
  if (p < 2) throw UsageError("backward elimination needs at least 2 variables");
  std::vector<std::size_t> sizes{p};
  while (sizes.back() > 2) {
    auto next = static_cast<std::size_t>(std::floor((1.0 - drop_rate) * static_cast<double>(sizes.back())));
    next = std::min(std::max<std::size_t>(next, 2), sizes.back() - 1);
    sizes.push_back(next);
  }
  return sizes;
}

/// Backward elimination on a single up-front ranking: keep the top s_k
/// variables for each size in backward_sizes and score each subset.
inline SelectionResult baseline_backward_select(const Dataset& data, ImportanceMethod ranking,
                                                CandidateScore score, const ForestConfig& config,
                                                Seed seed, double drop_rate = 0.2) {
  const auto sizes = backward_sizes(data.cols(), drop_rate);
  SelectionResult res;
  res.method = ranking == ImportanceMethod::gini && score == CandidateScore::oob_auc
                   ? Selector::calle
                   : Selector::diaz_uri;
  res.score_kind = score;
  res.importance_report = measure_importance(data, ranking, config, derive(seed, "importance"));
  const auto order = importance_order(res.importance_report);
  for (auto s : sizes) {
    CandidateSet c;
    c.variables.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s));
    c.pivot = c.variables.back();
    res.candidates.push_back(std::move(c));
  }
  res.candidates = score_candidates(data, std::move(res.candidates), Sampling::none, config,
                                    derive(seed, "scoring"), score);
  detail::finish(res);
  return res;
}

/// Runs any of the five selectors.
inline SelectionResult run_selector(const Dataset& data, Selector method, const ForestConfig& config,
                                    Seed seed, double u = 2.0, double drop_rate = 0.2) {
  switch (method) {
    case Selector::diaz_uri:
      return baseline_backward_select(data, ImportanceMethod::perm_accu, CandidateScore::oob_error,
                                      config, seed, drop_rate);
    case Selector::calle:
      return baseline_backward_select(data, ImportanceMethod::gini, CandidateScore::oob_auc, config,
                                      seed, drop_rate);
    default:
      return select_optimal(data, method, config, seed, u);
  }
}

inline nlohmann::json selection_to_json(const SelectionResult& res,
                                        const std::vector<std::string>& names) {
  auto name = [&](std::size_t v) { return v < names.size() ? names[v] : std::to_string(v + 1); };
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : res.candidates) {
    nlohmann::json members = nlohmann::json::array();
    for (auto v : c.variables) members.push_back(name(v));
    cands.push_back({{"size", c.variables.size()},
                     {"members", members},
                     {"pivot", name(c.pivot)},
                     {"score", c.score ? nlohmann::json(*c.score) : nlohmann::json(nullptr)}});
  }
  return {{"method", std::string(to_string(res.method))},
          {"score", std::string(to_string(res.score_kind))},
          {"n_candidates", res.n_candidates()},
          {"optimal", res.optimal},
          {"optimal_scored", res.optimal_scored},
          {"selected", cands.at(res.optimal)["members"]},
          {"candidates", cands}};
}

}  // namespace rfvi
