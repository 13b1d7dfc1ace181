// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "panops/panops.h"

namespace panops::cli {

using nlohmann::json;

/// Bad flags or flag combinations; exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data or failed processing; exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws DataError carrying the library message when `status` is not OK.
void check(panops_status status, const std::string& context);

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const noexcept { Destroy(p); }
};

using TensorPtr = std::unique_ptr<panops_tensor, Deleter<panops_tensor, panops_tensor_destroy>>;
using ImagePtr = std::unique_ptr<panops_image, Deleter<panops_image, panops_image_destroy>>;
using LabelsPtr = std::unique_ptr<panops_labels, Deleter<panops_labels, panops_labels_destroy>>;
using PalettePtr = std::unique_ptr<panops_palette, Deleter<panops_palette, panops_palette_destroy>>;
using ConfusionPtr = std::unique_ptr<panops_confusion, Deleter<panops_confusion, panops_confusion_destroy>>;
using SimilarityPtr = std::unique_ptr<panops_similarity, Deleter<panops_similarity, panops_similarity_destroy>>;
using TaxonomyPtr = std::unique_ptr<panops_taxonomy, Deleter<panops_taxonomy, panops_taxonomy_destroy>>;

using Shape4 = std::array<std::uint64_t, 4>;

Shape4 tensor_shape(const panops_tensor* t);
std::string shape_str(const Shape4& s);

TensorPtr load_tensor(const std::string& path);
void save_tensor(const panops_tensor* t, const std::string& path);
ImagePtr load_image(const std::string& path);
void save_image(const panops_image* image, const std::string& path);
LabelsPtr load_labels(const std::string& path);
void save_labels(const panops_labels* labels, const std::string& path);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Parses "a,b,c,d" into four positive integers.
Shape4 parse_shape(const std::string& text);

constexpr double kDegree = 3.14159265358979323846 / 180.0;

/// Default sidecar location: the output path with its extension replaced by ".json".
std::string default_report_path(const std::string& output);

/// Reproducibility record written next to each output.
class Report {
 public:
  explicit Report(std::string command);

  json& parameters() { return doc_["parameters"]; }
  json& operator[](const std::string& key) { return doc_[key]; }
  void input(const std::string& role, const std::string& path);
  void output(const std::string& role, const std::string& path);

  const json& doc() const { return doc_; }
  void write(const std::string& path) const;

 private:
  json doc_;
};

}  // namespace panops::cli
