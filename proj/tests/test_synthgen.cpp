#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rfvi/synthgen.hpp"

using namespace rfvi;

namespace {

double class_mean(const Dataset& d, std::size_t col, std::uint8_t cls) {
  double s = 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < d.rows(); ++i)
    if (d.label(i) == cls) {
      s += d.value(i, col);
      ++k;
    }
  return s / static_cast<double>(k);
}

double class_var(const Dataset& d, std::size_t col, std::uint8_t cls) {
  const double m = class_mean(d, col, cls);
  double ss = 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < d.rows(); ++i)
    if (d.label(i) == cls) {
      ss += (d.value(i, col) - m) * (d.value(i, col) - m);
      ++k;
    }
  return ss / static_cast<double>(k - 1);
}

}  // namespace

TEST_CASE("simulation class sizes follow the rounding rule") {
  SimulationConfig c;
  c.total = 50;
  c.imbalance = 1;
  auto d = gen_simulation(c, Seed{1});
  CHECK(d.count(1) == 25);
  CHECK(d.count(0) == 25);
  CHECK(d.cols() == 30);
  c.total = 100;
  c.imbalance = 10;
  d = gen_simulation(c, Seed{1});
  CHECK(d.count(1) == 9);
  CHECK(d.count(0) == 91);
  c.total = 50;
  c.imbalance = 20;
  d = gen_simulation(c, Seed{1});
  CHECK(d.count(1) == 2);
  CHECK(d.count(0) == 48);
}

TEST_CASE("simulation block shifts") {
  SimulationConfig c;
  c.total = 50;
  c.imbalance = 1;
  const auto d = gen_simulation(c, Seed{4});
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(std::abs(class_mean(d, j, 1) - 1.0) <= 3.0 / 5.0);
  }

  c.total = 20000;
  const auto big = gen_simulation(c, Seed{5});
  const double expect[] = {1.0, 0.75, 0.5, 0.0};
  for (std::size_t j = 0; j < 30; ++j) {
    const double want = expect[std::min<std::size_t>(j / 5, 3)];
    CHECK(std::abs(class_mean(big, j, 1) - want) < 0.05);
    CHECK(std::abs(class_mean(big, j, 0)) < 0.05);
  }
}

TEST_CASE("simulation is reproducible") {
  SimulationConfig c;
  CHECK(gen_simulation(c, Seed{3}) == gen_simulation(c, Seed{3}));
  CHECK_FALSE(gen_simulation(c, Seed{3}) == gen_simulation(c, Seed{4}));
  c.imbalance = 0.5;
  CHECK_THROWS_AS(gen_simulation(c, Seed{3}), UsageError);
}

TEST_CASE("twonorm class means") {
  const auto d = gen_benchmark({Benchmark::twonorm, 1000, 10, {}}, Seed{1});
  CHECK(d.count(1) == 500);
  const double a = 2.0 / std::sqrt(10.0), tol = 3.0 / std::sqrt(500.0);
  for (std::size_t j = 0; j < 10; ++j) {
    CHECK(std::abs(class_mean(d, j, 1) - a) <= tol);
    CHECK(std::abs(class_mean(d, j, 0) + a) <= tol);
  }
}

TEST_CASE("ringnorm class-0 variance") {
  const auto d = gen_benchmark({Benchmark::ringnorm, 1000, 10, {}}, Seed{2});
  for (std::size_t j = 0; j < 10; ++j) {
    const double v = class_var(d, j, 0);
    CHECK(v >= 3.2);
    CHECK(v <= 4.8);
  }
}

TEST_CASE("threenorm class means") {
  const auto d = gen_benchmark({Benchmark::threenorm, 4000, 10, {}}, Seed{3});
  const double a = 2.0 / std::sqrt(10.0);
  for (std::size_t j = 0; j < 10; ++j) {
    CHECK(std::abs(class_mean(d, j, 1) - (j % 2 == 0 ? a : -a)) < 0.1);
    CHECK(std::abs(class_mean(d, j, 0)) < 0.1);
  }
}

TEST_CASE("half-volume circle") {
  const auto d2 = gen_benchmark({Benchmark::circle, 10000, 2, {}}, Seed{4});
  CHECK(static_cast<double>(d2.count(1)) / 10000.0 == Catch::Approx(0.5).margin(0.02));
  CHECK(half_volume_radius(2) == Catch::Approx(std::sqrt(2.0 / std::numbers::pi)));

  const auto d10 = gen_benchmark({Benchmark::circle, 10000, 10, {}}, Seed{5});
  CHECK(imbalance_ratio(d10) == Catch::Approx(2.1).margin(0.15));

  const auto custom = gen_benchmark({Benchmark::circle, 2000, 2, 0.5}, Seed{6});
  CHECK(static_cast<double>(custom.count(1)) / 2000.0 ==
        Catch::Approx(std::numbers::pi * 0.25 / 4.0).margin(0.03));
}

TEST_CASE("benchmark names") {
  CHECK(parse_benchmark("twn") == Benchmark::twonorm);
  CHECK(parse_benchmark("circle") == Benchmark::circle);
  CHECK(to_string(Benchmark::ringnorm) == "ringnorm");
  CHECK_THROWS_AS(parse_benchmark("spiral"), UsageError);
}
