#pragma once

// CSV ingestion and export.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rfvi/dataset.hpp"
#include "rfvi/error.hpp"

namespace rfvi {

enum class Encoding { one_hot, integer };

struct LoadedDataset {
  Dataset dataset;
  std::size_t dropped_rows = 0;  // rows rejected for a missing cell
  std::vector<std::string> warnings;
};

namespace csv {

/// RFC-4180 records: quoted fields, doubled quotes, CRLF or LF line ends.
inline std::vector<std::vector<std::string>> parse(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  char c;
  auto end_record = [&] {
    if (field_started || !record.empty()) {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    field_started = false;
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw DataError("stray quote on line " + std::to_string(line));
        quoted = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  end_record();
  return records;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline bool is_missing(std::string_view s) {
  s = trim(s);
  return s.empty() || s == "NA" || s == "?";
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::string quote(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace csv

/// Reads a dataset from a CSV stream. `source` names the stream in messages.
inline LoadedDataset load_csv(std::istream& in, const std::string& label_column,
                              const std::string& positive_label, Encoding encoding,
                              const std::string& source = "<stream>") {
  auto records = csv::parse(in);
  if (records.empty()) throw DataError(source + ": missing header row");
  const auto header = records.front();
  const std::size_t width = header.size();
  std::vector<std::string> names;
  for (const auto& h : header) names.emplace_back(csv::trim(h));

  auto label_it = std::find(names.begin(), names.end(), label_column);
  if (label_it == names.end())
    throw DataError(source + ": missing label column '" + label_column + "'");
  const auto label_col = static_cast<std::size_t>(label_it - names.begin());

  std::vector<const std::vector<std::string>*> kept;
  std::size_t dropped = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && csv::trim(rec[0]).empty()) continue;  // blank line
    if (rec.size() != width)
      throw DataError(source + ": row " + std::to_string(r + 1) + " has " +
                      std::to_string(rec.size()) + " fields, header has " +
                      std::to_string(width));
    if (std::any_of(rec.begin(), rec.end(), [](const auto& s) { return csv::is_missing(s); })) {
      ++dropped;
      continue;
    }
    kept.push_back(&rec);
  }
  if (kept.empty())
    throw DataError(source + ": no rows left after rejecting " + std::to_string(dropped) +
                    " rows with missing values");

  std::set<std::string> label_values;
  for (auto* rec : kept) label_values.emplace(csv::trim((*rec)[label_col]));
  if (label_values.size() != 2)
    throw DataError(source + ": label column '" + label_column + "' has " +
                    std::to_string(label_values.size()) +
                    " distinct values; a binary outcome is required");
  if (!label_values.count(positive_label))
    throw DataError(source + ": positive label '" + positive_label +
                    "' not found in column '" + label_column + "'");

  const std::size_t n = kept.size();
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = csv::trim((*kept[i])[label_col]) == positive_label ? 1 : 0;

  std::vector<double> values;
  std::vector<std::string> out_names;
  for (std::size_t c = 0; c < width; ++c) {
    if (c == label_col) continue;
    std::vector<double> col(n);
    bool numeric = true;
    for (std::size_t i = 0; i < n && numeric; ++i) {
      auto v = csv::parse_number((*kept[i])[c]);
      if (v) col[i] = *v;
      else numeric = false;
    }
    if (numeric) {
      values.insert(values.end(), col.begin(), col.end());
      out_names.push_back(names[c]);
      continue;
    }
    std::map<std::string, std::size_t> levels;
    for (auto* rec : kept) levels.emplace(csv::trim((*rec)[c]), 0);
    std::size_t code = 0;
    for (auto& [level, id] : levels) id = code++;
    if (encoding == Encoding::integer) {
      for (std::size_t i = 0; i < n; ++i)
        values.push_back(static_cast<double>(levels.at(std::string(csv::trim((*kept[i])[c])))));
      out_names.push_back(names[c]);
    } else {
      for (const auto& [level, id] : levels) {
        for (std::size_t i = 0; i < n; ++i)
          values.push_back(csv::trim((*kept[i])[c]) == level ? 1.0 : 0.0);
        out_names.push_back(names[c] + "=" + level);
      }
    }
  }
  if (out_names.empty()) throw DataError(source + ": no feature columns besides the label");

  LoadedDataset out{Dataset(n, std::move(values), std::move(labels), std::move(out_names)),
                    dropped, {}};
  if (dropped > 0)
    out.warnings.push_back(std::to_string(dropped) + " rows with missing values were rejected");
  if (out.dataset.count(1) > out.dataset.count(0))
    out.warnings.push_back("positive label '" + positive_label +
                           "' is the majority class; imbalance ratio is below 1");
  return out;
}

inline LoadedDataset load_csv(const std::string& path, const std::string& label_column,
                              const std::string& positive_label,
                              Encoding encoding = Encoding::one_hot) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load_csv(in, label_column, positive_label, encoding, path);
}

/// Writes features plus a 0/1 label column. Values use shortest round-trip
/// formatting, so reloading with positive label "1" reproduces the dataset.
inline void write_csv(const Dataset& data, std::ostream& out,
                      const std::string& label_column = "y") {
  for (const auto& name : data.names()) out << csv::quote(name) << ',';
  out << csv::quote(label_column) << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t c = 0; c < data.cols(); ++c) out << csv::format_double(data.value(i, c)) << ',';
    out << static_cast<int>(data.label(i)) << '\n';
  }
}

inline void write_csv(const Dataset& data, const std::string& path,
                      const std::string& label_column = "y") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_csv(data, out, label_column);
}

}  // namespace rfvi
