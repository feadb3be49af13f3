#pragma once

// Key-value configuration files for the mc-study and benchmark commands.
//
//   # comment
//   key = value
//
// Lists are comma separated. Keys may appear once, except `dataset`, which
// adds one data set per line:
//
//   dataset = <name> generator=<twonorm|threenorm|ringnorm|circle> [n=1000] [d=10] [radius=<r>]
//   dataset = <name> path=<file.csv> [label=y] [positive=1] [encoding=one-hot|integer]
//
// Relative CSV paths are resolved against the configuration file's directory.
//
// Monte Carlo keys: n_grid, ir_grid, replicates, methods, ntree, mtry,
// min_leaf_size, seed, u, workers.
// Benchmark keys: dataset, selectors, folds, replicates, ntree, mtry,
// min_leaf_size, seed, u, drop_rate, workers.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rfvi/csv.hpp"
#include "rfvi/error.hpp"
#include "rfvi/experiments.hpp"

namespace rfvi {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

namespace detail {

inline std::vector<ConfigEntry> parse_entries(std::istream& in, const std::string& source) {
  std::vector<ConfigEntry> out;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = csv::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw UsageError(source + ":" + std::to_string(no) + ": expected 'key = value'");
    ConfigEntry e{std::string(csv::trim(text.substr(0, eq))),
                  std::string(csv::trim(text.substr(eq + 1))), no};
    if (e.key.empty()) throw UsageError(source + ":" + std::to_string(no) + ": empty key");
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = csv::trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

class EntryReader {
 public:
  EntryReader(const ConfigEntry& e, const std::string& source) : e_(e), source_(source) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw UsageError(source_ + ":" + std::to_string(e_.line) + ": " + what);
  }
  double real(std::string_view s) const {
    auto v = csv::parse_number(s);
    if (!v) fail("'" + std::string(s) + "' is not a number");
    return *v;
  }
  std::uint64_t count(std::string_view s) const {
    const double v = real(s);
    if (v < 0 || v != std::floor(v) || v > 9.0e15) fail("'" + std::string(s) + "' is not a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  std::uint64_t count() const { return count(e_.value); }
  double real() const { return real(e_.value); }
  std::vector<std::string> list() const {
    auto v = split_list(e_.value);
    if (v.empty()) fail("empty list for '" + e_.key + "'");
    return v;
  }

 private:
  const ConfigEntry& e_;
  const std::string& source_;
};

/// Forest and run keys shared by both configurations. Returns false if `key` is not one.
inline bool apply_common(const ConfigEntry& e, const EntryReader& r, ForestConfig& forest,
                         Seed& seed, double& u, std::size_t& replicates, std::size_t& workers) {
  if (e.key == "ntree") forest.ntree = r.count();
  else if (e.key == "mtry") forest.mtry = r.count();
  else if (e.key == "min_leaf_size") forest.min_leaf_size = r.count();
  else if (e.key == "seed") seed = Seed{r.count()};
  else if (e.key == "u") u = r.real();
  else if (e.key == "replicates") replicates = r.count();
  else if (e.key == "workers") workers = r.count();
  else return false;
  if (forest.min_leaf_size < 1) r.fail("min_leaf_size must be at least 1");
  if (!(u > 0)) r.fail("u must be positive");
  if (workers < 1) r.fail("workers must be at least 1");
  return true;
}

inline void check_unique(const std::vector<ConfigEntry>& entries, const std::string& source) {
  std::map<std::string, std::size_t> seen;
  for (const auto& e : entries) {
    if (e.key == "dataset") continue;
    if (auto [it, fresh] = seen.emplace(e.key, e.line); !fresh)
      throw UsageError(source + ":" + std::to_string(e.line) + ": '" + e.key +
                       "' already set on line " + std::to_string(it->second));
  }
}

inline DatasetSource parse_dataset(const ConfigEntry& e, const EntryReader& r,
                                   const std::filesystem::path& base_dir) {
  std::istringstream words(e.value);
  DatasetSource src;
  if (!(words >> src.name)) r.fail("dataset needs a name");
  std::map<std::string, std::string> attrs;
  for (std::string w; words >> w;) {
    const auto eq = w.find('=');
    if (eq == std::string::npos || eq == 0) r.fail("dataset attribute '" + w + "' is not key=value");
    if (!attrs.emplace(w.substr(0, eq), w.substr(eq + 1)).second)
      r.fail("dataset attribute '" + w.substr(0, eq) + "' repeated");
  }
  auto take = [&](const std::string& k) -> std::optional<std::string> {
    auto it = attrs.find(k);
    if (it == attrs.end()) return std::nullopt;
    auto v = it->second;
    attrs.erase(it);
    return v;
  };
  if (auto g = take("generator")) {
    BenchmarkSpec spec;
    spec.name = parse_benchmark(*g);
    if (auto n = take("n")) spec.n = r.count(*n);
    if (auto d = take("d")) spec.d = r.count(*d);
    if (auto rad = take("radius")) spec.radius = r.real(*rad);
    src.generator = spec;
  } else if (auto p = take("path")) {
    std::filesystem::path path(*p);
    if (path.is_relative()) path = base_dir / path;
    src.path = path.string();
    if (auto l = take("label")) src.label = *l;
    if (auto v = take("positive")) src.positive = *v;
    if (auto enc = take("encoding")) {
      if (*enc == "one-hot") src.encoding = Encoding::one_hot;
      else if (*enc == "integer") src.encoding = Encoding::integer;
      else r.fail("unknown encoding '" + *enc + "'");
    }
  } else {
    r.fail("dataset '" + src.name + "' needs generator= or path=");
  }
  if (!attrs.empty()) r.fail("unknown dataset attribute '" + attrs.begin()->first + "'");
  return src;
}

}  // namespace detail

inline MonteCarloConfig parse_monte_carlo_config(std::istream& in,
                                                 const std::string& source = "<config>") {
  const auto entries = detail::parse_entries(in, source);
  detail::check_unique(entries, source);
  MonteCarloConfig cfg;
  for (const auto& e : entries) {
    detail::EntryReader r(e, source);
    if (detail::apply_common(e, r, cfg.forest, cfg.seed, cfg.u, cfg.replicates, cfg.workers)) continue;
    if (e.key == "n_grid") {
      cfg.n_grid.clear();
      for (const auto& v : r.list()) cfg.n_grid.push_back(r.count(v));
    } else if (e.key == "ir_grid") {
      cfg.ir_grid.clear();
      for (const auto& v : r.list()) cfg.ir_grid.push_back(r.real(v));
    } else if (e.key == "methods") {
      cfg.methods.clear();
      for (const auto& v : r.list()) cfg.methods.push_back(parse_importance_method(v));
    } else {
      r.fail("unknown key '" + e.key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline CvBenchmarkConfig parse_benchmark_config(std::istream& in,
                                                const std::string& source = "<config>",
                                                const std::filesystem::path& base_dir = ".") {
  const auto entries = detail::parse_entries(in, source);
  detail::check_unique(entries, source);
  CvBenchmarkConfig cfg;
  for (const auto& e : entries) {
    detail::EntryReader r(e, source);
    if (detail::apply_common(e, r, cfg.forest, cfg.seed, cfg.u, cfg.replicates, cfg.workers)) continue;
    if (e.key == "dataset") {
      cfg.datasets.push_back(detail::parse_dataset(e, r, base_dir));
    } else if (e.key == "selectors") {
      cfg.selectors.clear();
      for (const auto& v : r.list()) cfg.selectors.push_back(parse_selector(v));
    } else if (e.key == "folds") {
      cfg.folds = static_cast<std::uint32_t>(r.count());
    } else if (e.key == "drop_rate") {
      cfg.drop_rate = r.real();
      if (!(cfg.drop_rate > 0 && cfg.drop_rate < 1)) r.fail("drop_rate must lie in (0, 1)");
    } else {
      r.fail("unknown key '" + e.key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

namespace detail {

inline std::ifstream open_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return in;
}

}  // namespace detail

inline MonteCarloConfig load_monte_carlo_config(const std::string& path) {
  auto in = detail::open_config(path);
  return parse_monte_carlo_config(in, path);
}

inline CvBenchmarkConfig load_benchmark_config(const std::string& path) {
  auto in = detail::open_config(path);
  return parse_benchmark_config(in, path, std::filesystem::path(path).parent_path());
}

}  // namespace rfvi
