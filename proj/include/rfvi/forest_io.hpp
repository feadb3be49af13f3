#pragma once

// Forest checkpoint format (text, version-tagged, bit-exact):
//
//   rfvi-forest 1
//   config <ntree> <mtry> <min_leaf_size> <sampling> <seed> <oob_rule>
//   shape <n_original> <n_features> <table_rows>
//   origin <table_rows row indices>
//   tree <index> <node_count> <in_bag_count> <oob_count>
//   in <in_bag row indices>
//   oob <oob row indices>
//   node <variable> <threshold> <left> <right> <count0> <count1> <decrease>   (node_count lines)
//   end
//
// Doubles are written as hexadecimal floating point so loading restores every
// bit. Leaf nodes carry variable -1.

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>

#include "rfvi/error.hpp"
#include "rfvi/forest.hpp"

namespace rfvi {

namespace detail {

inline std::string hex_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, ptr);
}

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw DataError("forest file: unexpected end of input");
    return w;
  }
  void expect(const std::string& w) {
    auto got = word();
    if (got != w) throw DataError("forest file: expected '" + w + "', found '" + got + "'");
  }
  template <typename Int>
  Int integer() {
    auto w = word();
    Int v{};
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size())
      throw DataError("forest file: bad integer '" + w + "'");
    return v;
  }
  double real() {
    auto w = word();
    bool neg = !w.empty() && w[0] == '-';
    const char* b = w.data() + (neg ? 1 : 0);
    double v = 0;
    auto [ptr, ec] = std::from_chars(b, w.data() + w.size(), v, std::chars_format::hex);
    if (ec != std::errc() || ptr != w.data() + w.size())
      throw DataError("forest file: bad number '" + w + "'");
    return neg ? -v : v;
  }

 private:
  std::istream& in_;
};

}  // namespace detail

inline void save_forest(const Forest& f, std::ostream& out) {
  out << "rfvi-forest 1\n";
  out << "config " << f.config.ntree << ' ' << f.config.mtry << ' ' << f.config.min_leaf_size
      << ' ' << to_string(f.config.sampling) << ' ' << f.config.seed.value << ' '
      << to_string(f.config.oob_rule) << '\n';
  out << "shape " << f.n_original << ' ' << f.n_features << ' ' << f.origin_map.size() << '\n';
  out << "origin";
  for (auto r : f.origin_map) out << ' ' << r;
  out << '\n';
  for (std::size_t t = 0; t < f.trees.size(); ++t) {
    const Tree& tree = f.trees[t];
    out << "tree " << t << ' ' << tree.nodes.size() << ' ' << tree.in_bag.size() << ' '
        << tree.oob.size() << '\n';
    out << "in";
    for (auto r : tree.in_bag) out << ' ' << r;
    out << "\noob";
    for (auto r : tree.oob) out << ' ' << r;
    out << '\n';
    for (const auto& n : tree.nodes)
      out << "node " << n.variable << ' ' << detail::hex_double(n.threshold) << ' ' << n.left
          << ' ' << n.right << ' ' << n.count0 << ' ' << n.count1 << ' '
          << detail::hex_double(n.impurity_decrease) << '\n';
  }
  out << "end\n";
}

inline Forest load_forest(std::istream& in) {
  detail::TokenReader r(in);
  r.expect("rfvi-forest");
  if (auto v = r.integer<int>(); v != 1)
    throw DataError("forest file: unsupported version " + std::to_string(v));
  Forest f;
  r.expect("config");
  f.config.ntree = r.integer<std::size_t>();
  f.config.mtry = r.integer<std::size_t>();
  f.config.min_leaf_size = r.integer<std::size_t>();
  f.config.sampling = parse_sampling(r.word());
  f.config.seed.value = r.integer<std::uint64_t>();
  f.config.oob_rule = parse_oob_rule(r.word());
  r.expect("shape");
  f.n_original = r.integer<std::size_t>();
  f.n_features = r.integer<std::size_t>();
  const auto table_rows = r.integer<std::size_t>();
  r.expect("origin");
  f.origin_map.resize(table_rows);
  for (auto& v : f.origin_map) {
    v = r.integer<std::uint32_t>();
    if (v >= f.n_original) throw DataError("forest file: origin index out of range");
  }
  f.trees.resize(f.config.ntree);
  for (std::size_t t = 0; t < f.config.ntree; ++t) {
    r.expect("tree");
    if (r.integer<std::size_t>() != t) throw DataError("forest file: trees out of order");
    Tree& tree = f.trees[t];
    tree.nodes.resize(r.integer<std::size_t>());
    tree.in_bag.resize(r.integer<std::size_t>());
    tree.oob.resize(r.integer<std::size_t>());
    if (tree.nodes.empty()) throw DataError("forest file: tree without nodes");
    r.expect("in");
    for (auto& v : tree.in_bag) v = r.integer<std::uint32_t>();
    r.expect("oob");
    for (auto& v : tree.oob) v = r.integer<std::uint32_t>();
    for (auto& n : tree.nodes) {
      r.expect("node");
      n.variable = r.integer<std::int32_t>();
      n.threshold = r.real();
      n.left = r.integer<std::uint32_t>();
      n.right = r.integer<std::uint32_t>();
      n.count0 = r.integer<std::uint32_t>();
      n.count1 = r.integer<std::uint32_t>();
      n.impurity_decrease = r.real();
      if (!n.is_leaf() && (n.left >= tree.nodes.size() || n.right >= tree.nodes.size() ||
                           static_cast<std::size_t>(n.variable) >= f.n_features))
        throw DataError("forest file: node reference out of range");
    }
  }
  r.expect("end");
  return f;
}

inline void save_forest(const Forest& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  save_forest(f, out);
}

inline Forest load_forest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load_forest(in);
}

}  // namespace rfvi
