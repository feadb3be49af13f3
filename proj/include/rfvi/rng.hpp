#pragma once

// Seeded random streams.
//
// Every random quantity in the library is drawn from an Rng constructed from
// a 64-bit stream key. Stream keys are derived from the user's master seed by
// hashing it together with a string tag and a list of integer coordinates
// (tree index, variable index, replicate, ...) through SplitMix64. Two streams
// with different coordinates are therefore independent of each other and of
// the order in which they are consumed, which is what makes results identical
// for any number of worker threads.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Distributions are implemented here rather than taken from
// <random>, whose distribution algorithms are implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace rfvi {

/// Master seed of a computation.
struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(Seed, Seed) = default;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// Derives an independent child seed from `parent`, a tag and coordinates.
template <typename... Ints>
constexpr Seed derive(Seed parent, std::string_view tag, Ints... coords) {
  std::uint64_t h = detail::splitmix64(parent.value ^ detail::fnv1a(tag));
  ((h = detail::splitmix64(h ^ detail::splitmix64(static_cast<std::uint64_t>(coords) +
                                                   0x632BE59BD9B4E019ULL))),
   ...);
  return Seed{h};
}

class Rng {
 public:
  explicit Rng(Seed seed) : engine_(detail::splitmix64(seed.value)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// Random permutation of 0..n-1.
  std::vector<std::uint32_t> permutation(std::size_t n) {
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    shuffle(std::span<std::uint32_t>(perm));
    return perm;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rfvi
