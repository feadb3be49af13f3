#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfvi/dataset.hpp"
#include "rfvi/rng.hpp"

namespace testutil {

/// Row-major convenience constructor.
inline rfvi::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                                  const std::vector<std::uint8_t>& labels) {
  const std::size_t n = rows.size(), p = rows.front().size();
  std::vector<double> col_major(n * p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) col_major[j * n + i] = rows[i][j];
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("X" + std::to_string(j + 1));
  return rfvi::Dataset(n, std::move(col_major), labels, std::move(names));
}

/// n rows, p gaussian columns; column 0 is shifted by `shift` for label 1.
inline rfvi::Dataset shifted_gaussians(std::size_t n0, std::size_t n1, std::size_t p, double shift,
                                       std::uint64_t seed) {
  rfvi::Rng rng(rfvi::Seed{seed});
  const std::size_t n = n0 + n1;
  std::vector<double> v(n * p);
  std::vector<std::uint8_t> y(n, 0);
  for (std::size_t i = n0; i < n; ++i) y[i] = 1;
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) v[j * n + i] = rng.normal() + (j == 0 && y[i] ? shift : 0.0);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("X" + std::to_string(j + 1));
  return rfvi::Dataset(n, std::move(v), std::move(y), std::move(names));
}

}  // namespace testutil
