// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "panops/image.hpp"

namespace panops::metrics {

/// counts(g, p): pixels with ground truth g predicted as p.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);

  std::size_t classes() const noexcept { return classes_; }
  std::uint64_t operator()(std::size_t gt, std::size_t pred) const { return counts_.at(gt * classes_ + pred); }
  std::uint64_t& operator()(std::size_t gt, std::size_t pred) { return counts_.at(gt * classes_ + pred); }

  std::uint64_t row_sum(std::size_t gt) const;
  std::uint64_t col_sum(std::size_t pred) const;
  std::uint64_t total() const;

  /// Adds the pixels of one prediction/ground-truth pair.
  void accumulate(const LabelMap& pred, const LabelMap& gt);

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, std::size_t classes);

struct IouResult {
  /// Empty for categories absent from both prediction and ground truth.
  std::vector<std::optional<double>> per_class;
  double mean = 0.0;
};

/// Symmetric C x C matrix with unit diagonal and entries in [0, 1].
class SimilarityMatrix {
 public:
  SimilarityMatrix(std::vector<std::string> names, std::vector<double> values);

  static SimilarityMatrix identity(std::size_t classes);

  /// CSV with a header row of names; each following row is a name then values.
  static SimilarityMatrix load_csv(const std::filesystem::path& path);
  static SimilarityMatrix parse_csv(const std::string& text);
  std::string to_csv() const;

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  double operator()(std::size_t i, std::size_t j) const { return values_.at(i * names_.size() + j); }

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
};

IouResult miou(const ConfusionMatrix& m);

/// Similarity-weighted IoU:
///   (sum_p S[c][p] M[c][p] + sum_g S[g][c] M[g][c] - M[c][c]) / union_c.
IouResult open_miou(const ConfusionMatrix& m, const SimilarityMatrix& s);

/// Rooted category tree. Depth of the root is 1.
class Taxonomy {
 public:
  /// Lines "child<TAB>parent"; exactly one line has parent "-".
  static Taxonomy parse(const std::string& text);
  static Taxonomy load(const std::filesystem::path& path);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t depth(const std::string& name) const;
  std::string lowest_common_ancestor(const std::string& a, const std::string& b) const;
  const std::string& root() const noexcept { return names_[root_]; }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::size_t node(const std::string& name) const;

  std::vector<std::string> names_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> depth_;
  std::map<std::string, std::size_t> index_;
  std::size_t root_ = 0;
};

/// Wu-Palmer: 2 depth(lca) / (depth(a) + depth(b)).
double wup_similarity(const Taxonomy& t, const std::string& a, const std::string& b);

SimilarityMatrix similarity_from_taxonomy(const Taxonomy& t, const std::vector<std::string>& categories);

}  // namespace panops::metrics
