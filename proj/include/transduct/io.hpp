#pragma once

// CSV ingestion and emission. Files are UTF-8, comma separated, first row a
// header, '.' as decimal point. Values are written with 17 significant
// digits so doubles round-trip exactly.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "transduct/core.hpp"

namespace transduct {

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

inline std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

/// Reads a whole CSV file. Blank lines are skipped; every data row must have
/// as many fields as the header.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvTable table;
  table.path = path;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) throw DimensionMismatch(path, number, table.header.size(), fields.size());
    table.rows.push_back({number, std::move(fields)});
  }
  if (!have_header) throw ParseError(path, 1, "missing header");
  return table;
}

inline double parse_double(const std::string& text, const std::string& path, std::size_t line) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ParseError(path, line, "invalid number '" + text + "'");
  if (!std::isfinite(value)) throw ParseError(path, line, "non-finite number '" + text + "'");
  return value;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Reads `id,f0,f1,...`.
inline FeatureSet read_features(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.header.size() < 2 || table.header.front() != "id")
    throw ParseError(path, 1, "feature header must be 'id,f0,f1,...'");
  if (table.rows.empty()) throw ParseError(path, 2, "no feature rows");
  const std::size_t d = table.header.size() - 1;
  Matrix data(table.rows.size(), d);
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string& id = row.fields.front();
    if (id.empty()) throw ParseError(path, row.line, "empty id");
    if (!seen.emplace(id, i).second) throw DuplicateId(path, row.line, id);
    ids.push_back(id);
    for (std::size_t k = 0; k < d; ++k) data(i, k) = parse_double(row.fields[k + 1], path, row.line);
  }
  return FeatureSet(std::move(data), std::move(ids));
}

inline void write_features(const std::string& path, const FeatureSet& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "id";
  for (std::size_t k = 0; k < features.dim(); ++k) out << ",f" << k;
  out << '\n';
  for (std::size_t i = 0; i < features.size(); ++i) {
    out << features.ids()[i];
    for (double v : features.data().row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

/// Class names mapped to indices in first-appearance order.
class ClassVocabulary {
 public:
  std::size_t intern(const std::string& name) {
    auto [it, inserted] = index_.try_emplace(name, names_.size());
    if (inserted) names_.push_back(name);
    return it->second;
  }
  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reads `id,label` keyed to the feature ids. An empty label is UNLABELED;
/// samples missing from the file are UNLABELED too. New label strings are
/// interned into `vocab`.
inline std::vector<std::size_t> read_label_column(const std::string& path, const FeatureSet& features,
                                                  ClassVocabulary& vocab) {
  CsvTable table = read_csv(path);
  if (table.header.size() != 2 || table.header[0] != "id") throw ParseError(path, 1, "label header must be 'id,label'");
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < features.size(); ++i) position.emplace(features.ids()[i], i);
  std::vector<std::size_t> labels(features.size(), kUnlabeled);
  std::vector<char> seen(features.size(), 0);
  for (const auto& row : table.rows) {
    const std::string& id = row.fields[0];
    auto it = position.find(id);
    if (it == position.end()) throw UnknownId(path, row.line, id);
    if (seen[it->second]) throw DuplicateId(path, row.line, id);
    seen[it->second] = 1;
    if (!row.fields[1].empty()) labels[it->second] = vocab.intern(row.fields[1]);
  }
  return labels;
}

inline void write_labels(const std::string& path, const std::vector<std::string>& ids, const LabelSet& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "id,label\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i] << ',';
    if (labels.is_labeled(i)) out << labels.class_names()[labels[i]];
    out << '\n';
  }
}

/// Features and labels joined on id; class indices follow first appearance
/// in the label file.
inline std::pair<FeatureSet, LabelSet> ingest(const std::string& features_path, const std::string& labels_path) {
  FeatureSet features = read_features(features_path);
  ClassVocabulary vocab;
  std::vector<std::size_t> labels = read_label_column(labels_path, features, vocab);
  if (vocab.size() == 0) throw DataError(labels_path + ": no labeled rows");
  return {std::move(features), LabelSet(vocab.size(), std::move(labels), vocab.names())};
}

/// Reads `id,c0,c1,...` (one numeric column per class) aligned to features.
inline Matrix read_matrix_by_id(const std::string& path, const FeatureSet& features, std::size_t cols) {
  CsvTable table = read_csv(path);
  if (table.header.empty() || table.header[0] != "id") throw ParseError(path, 1, "header must start with 'id'");
  if (table.header.size() != cols + 1) throw DimensionMismatch(path, 1, cols + 1, table.header.size());
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < features.size(); ++i) position.emplace(features.ids()[i], i);
  Matrix out(features.size(), cols);
  std::vector<char> seen(features.size(), 0);
  for (const auto& row : table.rows) {
    auto it = position.find(row.fields[0]);
    if (it == position.end()) throw UnknownId(path, row.line, row.fields[0]);
    if (seen[it->second]) throw DuplicateId(path, row.line, row.fields[0]);
    seen[it->second] = 1;
    for (std::size_t k = 0; k < cols; ++k) out(it->second, k) = parse_double(row.fields[k + 1], path, row.line);
  }
  for (std::size_t i = 0; i < features.size(); ++i)
    if (!seen[i]) throw DataError(path + ": missing row for id '" + features.ids()[i] + "'");
  return out;
}

/// Reads `id,allowed` where allowed is a ';'-separated list of class names.
/// Samples absent from the file may take every class.
inline std::vector<std::vector<std::size_t>> read_class_mask(const std::string& path, const FeatureSet& features,
                                                             const ClassVocabulary& vocab) {
  CsvTable table = read_csv(path);
  if (table.header.size() != 2 || table.header[0] != "id") throw ParseError(path, 1, "mask header must be 'id,allowed'");
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < features.size(); ++i) position.emplace(features.ids()[i], i);
  std::vector<std::size_t> all(vocab.size());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
  std::vector<std::vector<std::size_t>> mask(features.size(), all);
  std::vector<char> seen(features.size(), 0);
  for (const auto& row : table.rows) {
    auto it = position.find(row.fields[0]);
    if (it == position.end()) throw UnknownId(path, row.line, row.fields[0]);
    if (seen[it->second]) throw DuplicateId(path, row.line, row.fields[0]);
    seen[it->second] = 1;
    std::vector<std::size_t> allowed;
    std::stringstream ss(row.fields[1]);
    std::string name;
    while (std::getline(ss, name, ';')) {
      if (name.empty()) continue;
      auto c = vocab.find(name);
      if (!c) throw ParseError(path, row.line, "unknown class '" + name + "'");
      allowed.push_back(*c);
    }
    if (allowed.empty()) throw ParseError(path, row.line, "empty class mask");
    mask[it->second] = std::move(allowed);
  }
  return mask;
}

}  // namespace transduct
