#pragma once

// Synthetic data: the block-effect simulation design and four classic
// benchmark distributions (twonorm, ringnorm, threenorm, circle in a square).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfvi/dataset.hpp"
#include "rfvi/error.hpp"
#include "rfvi/rng.hpp"

namespace rfvi {

struct SimulationConfig {
  std::size_t total = 100;  // N
  double imbalance = 1.0;   // requested IR
  std::array<double, 4> effect_means{1.0, 0.75, 0.5, 0.0};  // strong, moderate, weak, noise
  std::array<std::size_t, 4> block_sizes{5, 5, 5, 15};
  double sigma = 1.0;

  std::size_t features() const {
    return std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0});
  }
  /// max(2, round-half-up(N / (IR + 1))).
  std::size_t minority_count() const {
    const auto n1 = static_cast<std::size_t>(
        std::floor(static_cast<double>(total) / (imbalance + 1.0) + 0.5));
    return std::max<std::size_t>(2, n1);
  }
  std::size_t majority_count() const { return total - minority_count(); }
};

/// Majority rows are N(0, sigma^2) in every column; minority rows shift each
/// block by its effect mean. Rows are ordered majority first.
inline Dataset gen_simulation(const SimulationConfig& cfg, Seed seed) {
  if (cfg.total < 10) throw UsageError("simulation needs N >= 10");
  if (!(cfg.imbalance >= 1.0) || !std::isfinite(cfg.imbalance))
    throw UsageError("simulation needs IR >= 1");
  if (!(cfg.sigma > 0.0)) throw UsageError("simulation needs sigma > 0");
  const std::size_t n1 = cfg.minority_count();
  if (n1 >= cfg.total) throw UsageError("N too small for the requested imbalance");
  const std::size_t n0 = cfg.total - n1;
  const std::size_t p = cfg.features();
  if (p == 0) throw UsageError("simulation needs at least one feature");

  std::vector<double> shift(p);
  std::vector<std::string> names(p);
  for (std::size_t b = 0, j = 0; b < 4; ++b)
    for (std::size_t k = 0; k < cfg.block_sizes[b]; ++k, ++j) shift[j] = cfg.effect_means[b];
  for (std::size_t j = 0; j < p; ++j) names[j] = "X" + std::to_string(j + 1);

  const std::size_t n = cfg.total;
  std::vector<double> values(n * p);
  Rng rng(derive(seed, "simulation"));
  for (std::size_t i = 0; i < n; ++i) {
    const bool minority = i >= n0;
    for (std::size_t j = 0; j < p; ++j)
      values[j * n + i] = rng.normal(minority ? shift[j] : 0.0, cfg.sigma);
  }
  std::vector<std::uint8_t> labels(n, 0);
  for (std::size_t i = n0; i < n; ++i) labels[i] = 1;
  return Dataset(n, std::move(values), std::move(labels), std::move(names));
}

enum class Benchmark { ringnorm, twonorm, threenorm, circle };

inline Benchmark parse_benchmark(std::string_view name) {
  if (name == "ringnorm" || name == "rng") return Benchmark::ringnorm;
  if (name == "twonorm" || name == "twn") return Benchmark::twonorm;
  if (name == "threenorm" || name == "trn") return Benchmark::threenorm;
  if (name == "circle" || name == "cir") return Benchmark::circle;
  throw UsageError("unknown benchmark '" + std::string(name) + "'");
}

inline std::string_view to_string(Benchmark b) {
  switch (b) {
    case Benchmark::ringnorm: return "ringnorm";
    case Benchmark::twonorm: return "twonorm";
    case Benchmark::threenorm: return "threenorm";
    case Benchmark::circle: return "circle";
  }
  return "?";
}

struct BenchmarkSpec {
  Benchmark name = Benchmark::twonorm;
  std::size_t n = 1000;
  std::size_t d = 10;
  /// Circle radius; unset means the half-volume radius.
  std::optional<double> radius;
};

/// Radius of the d-ball whose nominal volume is half the volume of [-1,1]^d.
/// For d > 2 the ball pokes out of the cube, so the share of cube points
/// inside is below one half (about 0.32 at d = 10).
inline double half_volume_radius(std::size_t d) {
  const double dd = static_cast<double>(d);
  const double log_r = ((dd - 1.0) * std::log(2.0) + std::lgamma(1.0 + dd / 2.0) -
                        (dd / 2.0) * std::log(std::numbers::pi)) / dd;
  return std::exp(log_r);
}

/// Balanced classes (n/2 rows of label 1) except for circle, where the label
/// is set by geometry. Rows are generated in order label 0 then label 1.
inline Dataset gen_benchmark(const BenchmarkSpec& spec, Seed seed) {
  if (spec.n < 10) throw UsageError("benchmark needs n >= 10");
  if (spec.d < 2) throw UsageError("benchmark needs d >= 2");
  const std::size_t n = spec.n, d = spec.d;
  const double a = 2.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> values(n * d);
  std::vector<std::uint8_t> labels(n, 0);
  std::vector<std::string> names(d);
  for (std::size_t j = 0; j < d; ++j) names[j] = "X" + std::to_string(j + 1);
  Rng rng(derive(seed, "benchmark", static_cast<int>(spec.name)));
  const std::size_t n0 = n - n / 2;

  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = i >= n0;
    auto set = [&](std::size_t j, double v) { values[j * n + i] = v; };
    switch (spec.name) {
      case Benchmark::twonorm:
        for (std::size_t j = 0; j < d; ++j) set(j, rng.normal(positive ? a : -a, 1.0));
        break;
      case Benchmark::ringnorm:
        for (std::size_t j = 0; j < d; ++j)
          set(j, positive ? rng.normal(a, 1.0) : rng.normal(0.0, 2.0));
        break;
      case Benchmark::threenorm:
        if (positive) {
          for (std::size_t j = 0; j < d; ++j) set(j, rng.normal(j % 2 == 0 ? a : -a, 1.0));
        } else {
          const double m = rng.uniform01() < 0.5 ? a : -a;
          for (std::size_t j = 0; j < d; ++j) set(j, rng.normal(m, 1.0));
        }
        break;
      case Benchmark::circle: {
        const double r = spec.radius.value_or(half_volume_radius(d));
        double sq = 0;
        for (std::size_t j = 0; j < d; ++j) {
          const double v = rng.uniform(-1.0, 1.0);
          set(j, v);
          sq += v * v;
        }
        labels[i] = sq <= r * r ? 1 : 0;
        continue;
      }
    }
    labels[i] = positive ? 1 : 0;
  }
  return Dataset(n, std::move(values), std::move(labels), std::move(names));
}

}  // namespace rfvi
