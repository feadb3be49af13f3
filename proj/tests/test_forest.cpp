#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "rfvi/forest.hpp"
#include "rfvi/forest_io.hpp"
#include "rfvi/synthgen.hpp"

using namespace rfvi;

namespace {

std::array<std::size_t, 2> class_counts(const Dataset& table, const std::vector<std::uint32_t>& rows) {
  std::array<std::size_t, 2> c{0, 0};
  for (auto r : rows) ++c[table.label(r)];
  return c;
}

std::vector<std::uint32_t> identity(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

}  // namespace

TEST_CASE("under-sampling draws n1 rows per class") {
  const auto d = testutil::shifted_gaussians(48, 2, 3, 1.0, 1);
  Rng rng(Seed{1});
  const auto map = identity(d.rows());
  for (int t = 0; t < 20; ++t) {
    auto s = draw_training_sample(d, map, d.rows(), Sampling::under, rng);
    CHECK(class_counts(d, s.in_bag) == std::array<std::size_t, 2>{2, 2});
  }
}

TEST_CASE("over-sampling balances the table and the sample") {
  const auto d = testutil::shifted_gaussians(48, 2, 3, 1.0, 2);
  Rng rng(Seed{2});
  const auto b = oversample_balance(d, rng);
  CHECK(b.table.rows() == 96);
  CHECK(b.table.count(0) == 48);
  CHECK(b.table.count(1) == 48);
  for (std::size_t i = 0; i < d.rows(); ++i) CHECK(b.origin_map[i] == i);
  for (std::size_t i = 0; i < b.table.rows(); ++i) {
    CHECK(b.table.label(i) == d.label(b.origin_map[i]));
    CHECK(b.table.value(i, 1) == d.value(b.origin_map[i], 1));
  }
  auto s = draw_training_sample(b.table, b.origin_map, d.rows(), Sampling::over, rng);
  CHECK(class_counts(b.table, s.in_bag) == std::array<std::size_t, 2>{48, 48});
  for (auto r : s.oob)
    for (auto t : s.in_bag) CHECK(b.origin_map[t] != r);

  const auto bal = testutil::shifted_gaussians(10, 10, 2, 1.0, 3);
  CHECK(oversample_balance(bal, rng).table == bal);
}

TEST_CASE("out-of-bag fraction approaches 1/e") {
  const auto d = testutil::shifted_gaussians(900, 100, 1, 1.0, 4);
  Rng rng(Seed{4});
  const auto map = identity(d.rows());
  double total = 0;
  for (int t = 0; t < 200; ++t) {
    auto s = draw_training_sample(d, map, d.rows(), Sampling::none, rng);
    CHECK(s.in_bag.size() == 1000);
    total += static_cast<double>(s.oob.size()) / 1000.0;
  }
  const double oracle = std::pow(1.0 - 1.0 / 1000.0, 1000.0);
  CHECK(std::abs(total / 200 - oracle) <= 0.02);
}

TEST_CASE("two separable rows give a single pure split") {
  const auto d = testutil::make_dataset({{0.0}, {1.0}}, {0, 1});
  ForestConfig c;
  c.ntree = 50;
  c.seed = Seed{5};
  const auto f = fit_forest(d, c);
  CHECK(f.trees.size() == 50);
  std::size_t checked = 0;
  for (const auto& t : f.trees) {
    auto counts = class_counts(d, t.in_bag);
    if (counts[0] == 0 || counts[1] == 0) continue;
    ++checked;
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].variable == 0);
    CHECK(t.nodes[0].threshold == 0.5);
    CHECK(t.nodes[t.nodes[0].left].probability() == 0.0);
    CHECK(t.nodes[t.nodes[0].right].probability() == 1.0);
  }
  CHECK(checked > 10);
}

TEST_CASE("trees fit their bootstrap exactly with unit leaves") {
  const auto d = testutil::shifted_gaussians(40, 20, 4, 1.0, 6);
  ForestConfig c;
  c.ntree = 10;
  c.seed = Seed{6};
  const auto f = fit_forest(d, c);
  for (const auto& t : f.trees)
    for (auto r : t.in_bag) CHECK(t.predict(d, r) == static_cast<double>(d.label(r)));
}

TEST_CASE("default forest size and mtry") {
  ForestConfig c;
  CHECK(c.ntree == 200);
  CHECK(c.resolved_mtry(30) == 5);
  CHECK(c.resolved_mtry(10) == 3);
  CHECK(c.resolved_mtry(1) == 1);
  const auto d = testutil::shifted_gaussians(30, 10, 3, 1.0, 7);
  CHECK(fit_forest(d, c).trees.size() == 200);
  c.mtry = 4;
  CHECK_THROWS_AS(fit_forest(d, c), UsageError);
}

TEST_CASE("forests are reproducible and independent of threads") {
  const auto d = testutil::shifted_gaussians(60, 15, 5, 1.0, 8);
  for (auto sampling : {Sampling::none, Sampling::under, Sampling::over}) {
    ForestConfig c;
    c.ntree = 40;
    c.sampling = sampling;
    c.seed = Seed{8};
    const auto a = fit_forest(d, c);
    c.threads = 4;
    const auto b = fit_forest(d, c);
    std::ostringstream sa, sb;
    save_forest(a, sa);
    save_forest(b, sb);
    CHECK(sa.str() == sb.str());
    for (std::size_t i = 0; i < d.rows(); ++i) CHECK(a.predict(d, i) == b.predict(d, i));
  }
}

TEST_CASE("out-of-bag predictions") {
  const auto d = testutil::shifted_gaussians(70, 30, 3, 2.0, 9);
  ForestConfig c;
  c.seed = Seed{9};
  const auto f = fit_forest(d, c);
  const auto oob = oob_predictions(f, d);
  CHECK(oob.uncovered_count() == 0);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    double s = 0;
    std::uint32_t k = 0;
    for (const auto& t : f.trees)
      if (std::binary_search(t.oob.begin(), t.oob.end(), static_cast<std::uint32_t>(i))) {
        s += t.predict(d, i);
        ++k;
      }
    CHECK(oob.votes[i] == k);
    CHECK(oob.score[i] == Catch::Approx(s / k).epsilon(1e-12));
  }
}

TEST_CASE("a row out-of-bag for every tree scores the mean tree probability") {
  const auto d = testutil::shifted_gaussians(20, 10, 2, 1.0, 10);
  ForestConfig c;
  c.ntree = 15;
  c.seed = Seed{10};
  auto f = fit_forest(d, c);
  for (auto& t : f.trees) {
    t.oob = {0};
    t.in_bag.clear();
  }
  const auto oob = oob_predictions(f, d);
  CHECK(oob.votes[0] == 15);
  CHECK(oob.score[0] == Catch::Approx(f.predict(d, 0)).epsilon(1e-12));
  CHECK(std::isnan(oob.score[1]));
  CHECK(oob.uncovered_count() == d.rows() - 1);
}

TEST_CASE("over-sampled forests evaluate out-of-bag rows by rule") {
  const auto d = testutil::shifted_gaussians(80, 8, 3, 1.5, 11);
  ForestConfig c;
  c.ntree = 30;
  c.sampling = Sampling::over;
  c.seed = Seed{11};
  const auto table_rule = fit_forest(d, c);
  CHECK(table_rule.origin_map.size() == 160);
  CHECK(oob_predictions(table_rule, d).score.size() == 160);
  for (const auto& t : table_rule.trees)
    for (auto r : t.oob) CHECK(std::find(t.in_bag.begin(), t.in_bag.end(), r) == t.in_bag.end());

  c.oob_rule = OobRule::original_rows;
  const auto original_rule = fit_forest(d, c);
  CHECK(oob_predictions(original_rule, d).score.size() == 88);
  for (const auto& t : original_rule.trees)
    for (auto r : t.oob)
      for (auto b : t.in_bag) CHECK(original_rule.origin_map[b] != r);
}

TEST_CASE("forest files restore every bit") {
  const auto d = testutil::shifted_gaussians(50, 12, 4, 1.0, 12);
  ForestConfig c;
  c.ntree = 25;
  c.sampling = Sampling::over;
  c.seed = Seed{12};
  const auto f = fit_forest(d, c);
  std::stringstream buf;
  save_forest(f, buf);
  const auto g = load_forest(buf);
  CHECK(g.trees.size() == f.trees.size());
  CHECK(g.origin_map == f.origin_map);
  CHECK(g.config.sampling == Sampling::over);
  CHECK(g.config.seed == f.config.seed);
  for (std::size_t t = 0; t < f.trees.size(); ++t) {
    CHECK(g.trees[t].in_bag == f.trees[t].in_bag);
    CHECK(g.trees[t].oob == f.trees[t].oob);
    REQUIRE(g.trees[t].nodes.size() == f.trees[t].nodes.size());
    for (std::size_t k = 0; k < f.trees[t].nodes.size(); ++k) {
      CHECK(g.trees[t].nodes[k].threshold == f.trees[t].nodes[k].threshold);
      CHECK(g.trees[t].nodes[k].impurity_decrease == f.trees[t].nodes[k].impurity_decrease);
    }
  }
  std::stringstream again;
  save_forest(g, again);
  CHECK(again.str() == buf.str());

  std::istringstream broken("rfvi-forest 2\n");
  CHECK_THROWS_AS(load_forest(broken), DataError);
  std::istringstream truncated(buf.str().substr(0, buf.str().size() / 2));
  CHECK_THROWS_AS(load_forest(truncated), DataError);
}
