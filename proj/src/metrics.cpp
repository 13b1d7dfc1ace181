// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "panops/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace panops::metrics {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {
  if (classes == 0 || classes > LabelMap::kIgnoreId)
    throw ArgumentError("category count must lie in [1, 255], got " + std::to_string(classes));
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t gt) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < classes_; ++p) s += (*this)(gt, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::uint64_t s = 0;
  for (std::size_t g = 0; g < classes_; ++g) s += (*this)(g, pred);
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (auto v : counts_) s += v;
  return s;
}

void ConfusionMatrix::accumulate(const LabelMap& pred, const LabelMap& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width())
    throw ArgumentError("prediction is " + std::to_string(pred.height()) + "x" + std::to_string(pred.width()) +
                        " but ground truth is " + std::to_string(gt.height()) + "x" + std::to_string(gt.width()));
  // Validate first so a failed call leaves the counts untouched.
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::uint8_t g = gt.ids()[i];
    if (g == LabelMap::kIgnoreId) continue;
    const std::uint8_t p = pred.ids()[i];
    if (g >= classes_ || p >= classes_)
      throw ArgumentError("category id " + std::to_string(g >= classes_ ? g : p) + " at pixel " +
                          std::to_string(i) + " is not below " + std::to_string(classes_));
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::uint8_t g = gt.ids()[i];
    if (g != LabelMap::kIgnoreId) ++counts_[g * classes_ + pred.ids()[i]];
  }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw ArgumentError("confusion matrices differ in size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, std::size_t classes) {
  ConfusionMatrix m(classes);
  m.accumulate(pred, gt);
  return m;
}

namespace {

template <typename Numerator>
IouResult reduce(const ConfusionMatrix& m, Numerator numerator) {
  IouResult r;
  r.per_class.resize(m.classes());
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < m.classes(); ++c) {
    const std::uint64_t uni = m.row_sum(c) + m.col_sum(c) - m(c, c);
    if (uni == 0) continue;
    const double v = numerator(c) / static_cast<double>(uni);
    r.per_class[c] = v;
    sum += v;
    ++present;
  }
  if (present == 0) throw NoCategoriesError();
  r.mean = sum / static_cast<double>(present);
  return r;
}

}  // namespace

IouResult miou(const ConfusionMatrix& m) {
  return reduce(m, [&](std::size_t c) { return static_cast<double>(m(c, c)); });
}

IouResult open_miou(const ConfusionMatrix& m, const SimilarityMatrix& s) {
  if (s.size() != m.classes())
    throw ArgumentError("similarity matrix is " + std::to_string(s.size()) + "x" + std::to_string(s.size()) +
                        " but there are " + std::to_string(m.classes()) + " categories");
  return reduce(m, [&](std::size_t c) {
    double acc = 0.0;
    for (std::size_t p = 0; p < m.classes(); ++p) acc += s(c, p) * static_cast<double>(m(c, p));
    for (std::size_t g = 0; g < m.classes(); ++g) acc += s(g, c) * static_cast<double>(m(g, c));
    return acc - static_cast<double>(m(c, c));
  });
}

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> names, std::vector<double> values)
    : names_(std::move(names)), values_(std::move(values)) {
  const std::size_t n = names_.size();
  if (n == 0) throw ArgumentError("similarity matrix must have at least one category");
  if (values_.size() != n * n) throw ArgumentError("similarity matrix must be square");
  std::set<std::string> seen;
  for (const auto& name : names_)
    if (!seen.insert(name).second) throw ArgumentError("duplicate category '" + name + "'");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double v = values_[i * n + j];
      if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("similarity values must lie in [0, 1]");
      if (i == j && v != 1.0) throw ArgumentError("similarity diagonal must be 1 for '" + names_[i] + "'");
      if (v != values_[j * n + i])
        throw ArgumentError("similarity matrix is not symmetric at ('" + names_[i] + "', '" + names_[j] + "')");
    }
}

SimilarityMatrix SimilarityMatrix::identity(std::size_t classes) {
  std::vector<std::string> names;
  std::vector<double> values(classes * classes, 0.0);
  for (std::size_t i = 0; i < classes; ++i) {
    names.push_back(std::to_string(i));
    values[i * classes + i] = 1.0;
  }
  return SimilarityMatrix(std::move(names), std::move(values));
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SimilarityMatrix SimilarityMatrix::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_csv(line));
  }
  if (rows.empty()) throw FormatError("similarity CSV is empty");
  std::vector<std::string> names(rows[0].begin() + 1, rows[0].end());
  const std::size_t n = names.size();
  if (rows.size() != n + 1)
    throw FormatError("similarity CSV has " + std::to_string(rows.size() - 1) + " rows for " + std::to_string(n) +
                      " categories");
  std::vector<double> values(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != n + 1) throw FormatError("similarity CSV row " + std::to_string(i + 2) + " has wrong width");
    if (row[0] != names[i])
      throw FormatError("similarity CSV row " + std::to_string(i + 2) + " is '" + row[0] + "', expected '" +
                        names[i] + "'");
    for (std::size_t j = 0; j < n; ++j) {
      const std::string& cell = row[j + 1];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw FormatError("similarity CSV: bad number '" + cell + "' in row " + std::to_string(i + 2));
      values[i * n + j] = v;
    }
  }
  return SimilarityMatrix(std::move(names), std::move(values));
}

SimilarityMatrix SimilarityMatrix::load_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::string SimilarityMatrix::to_csv() const {
  std::string out = "category";
  for (const auto& n : names_) out += "," + n;
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < names_.size(); ++i) {
    out += names_[i];
    for (std::size_t j = 0; j < names_.size(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, (*this)(i, j));
      out += ",";
      out.append(buf, res.ptr);
    }
    out += "\n";
  }
  return out;
}

Taxonomy Taxonomy::parse(const std::string& text) {
  Taxonomy t;
  std::vector<std::string> parents;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t roots = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw FormatError("taxonomy line " + std::to_string(lineno) + ": expected child<TAB>parent");
    std::string child = trim(line.substr(0, tab));
    std::string parent = trim(line.substr(tab + 1));
    if (child.empty() || parent.empty())
      throw FormatError("taxonomy line " + std::to_string(lineno) + ": empty name");
    if (t.index_.count(child)) throw FormatError("taxonomy line " + std::to_string(lineno) + ": '" + child + "' defined twice");
    if (parent == "-") {
      ++roots;
      t.root_ = t.names_.size();
    }
    t.index_[child] = t.names_.size();
    t.names_.push_back(std::move(child));
    parents.push_back(std::move(parent));
  }
  if (roots != 1) throw FormatError("taxonomy must have exactly one root line, found " + std::to_string(roots));

  const std::size_t n = t.names_.size();
  t.parent_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == t.root_) {
      t.parent_[i] = i;
      continue;
    }
    const auto it = t.index_.find(parents[i]);
    if (it == t.index_.end()) throw FormatError("taxonomy: parent '" + parents[i] + "' of '" + t.names_[i] + "' is undefined");
    t.parent_[i] = it->second;
  }
  // Depths by walking to the root; a walk longer than n means a cycle.
  t.depth_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t d = 1;
    std::size_t cur = i;
    while (cur != t.root_) {
      cur = t.parent_[cur];
      if (++d > n) throw FormatError("taxonomy: cycle through '" + t.names_[i] + "'");
    }
    t.depth_[i] = d;
  }
  return t;
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::size_t Taxonomy::node(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw ArgumentError("category '" + name + "' is not in the taxonomy");
  return it->second;
}

std::size_t Taxonomy::depth(const std::string& name) const { return depth_[node(name)]; }

std::string Taxonomy::lowest_common_ancestor(const std::string& a, const std::string& b) const {
  std::size_t x = node(a);
  std::size_t y = node(b);
  while (depth_[x] > depth_[y]) x = parent_[x];
  while (depth_[y] > depth_[x]) y = parent_[y];
  while (x != y) {
    x = parent_[x];
    y = parent_[y];
  }
  return names_[x];
}

double wup_similarity(const Taxonomy& t, const std::string& a, const std::string& b) {
  const double da = static_cast<double>(t.depth(a));
  const double db = static_cast<double>(t.depth(b));
  const double dl = static_cast<double>(t.depth(t.lowest_common_ancestor(a, b)));
  return 2.0 * dl / (da + db);
}

SimilarityMatrix similarity_from_taxonomy(const Taxonomy& t, const std::vector<std::string>& categories) {
  const std::size_t n = categories.size();
  std::vector<double> values(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) values[i * n + j] = wup_similarity(t, categories[i], categories[j]);
  return SimilarityMatrix(categories, std::move(values));
}

}  // namespace panops::metrics
