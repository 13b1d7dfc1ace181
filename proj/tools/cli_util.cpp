// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli_util.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <fstream>

namespace panops::cli {

void check(panops_status status, const std::string& context) {
  if (status == PANOPS_OK) return;
  throw DataError(context + ": " + panops_last_error());
}

Shape4 tensor_shape(const panops_tensor* t) {
  Shape4 s{};
  panops_tensor_shape(t, s.data());
  return s;
}

std::string shape_str(const Shape4& s) {
  return "(" + std::to_string(s[0]) + ", " + std::to_string(s[1]) + ", " + std::to_string(s[2]) + ", " +
         std::to_string(s[3]) + ")";
}

TensorPtr load_tensor(const std::string& path) {
  panops_tensor* t = nullptr;
  check(panops_tensor_load(path.c_str(), &t), path);
  return TensorPtr(t);
}

void save_tensor(const panops_tensor* t, const std::string& path) { check(panops_tensor_save(t, path.c_str()), path); }

ImagePtr load_image(const std::string& path) {
  panops_image* img = nullptr;
  check(panops_image_load(path.c_str(), &img), path);
  return ImagePtr(img);
}

void save_image(const panops_image* image, const std::string& path) {
  check(panops_image_save(image, path.c_str()), path);
}

LabelsPtr load_labels(const std::string& path) {
  panops_labels* l = nullptr;
  check(panops_labels_load(path.c_str(), &l), path);
  return LabelsPtr(l);
}

void save_labels(const panops_labels* labels, const std::string& path) {
  check(panops_labels_save(labels, path.c_str()), path);
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw DataError("sha256: init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

Shape4 parse_shape(const std::string& text) {
  Shape4 s{};
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t end = i < 3 ? text.find(',', pos) : text.size();
    if (end == std::string::npos) throw UsageError("shape '" + text + "' must be n,c,h,w");
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, s[i]);
    if (ec != std::errc{} || ptr != text.data() + end || s[i] == 0)
      throw UsageError("shape '" + text + "' must be four positive integers n,c,h,w");
    pos = end + 1;
  }
  return s;
}

std::string default_report_path(const std::string& output) {
  return std::filesystem::path(output).replace_extension(".json").string();
}

Report::Report(std::string command) {
  doc_["schema"] = "panops-report/1";
  doc_["command"] = std::move(command);
  doc_["version"] = panops_version();
  doc_["parameters"] = json::object();
  doc_["inputs"] = json::object();
  doc_["outputs"] = json::object();
}

void Report::input(const std::string& role, const std::string& path) {
  doc_["inputs"][role] = {{"path", path}, {"sha256", sha256_file(path)}};
}

void Report::output(const std::string& role, const std::string& path) {
  doc_["outputs"][role] = {{"path", path}, {"sha256", sha256_file(path)}};
}

void Report::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot write report");
  out << doc_.dump(2) << '\n';
  if (!out) throw DataError(path + ": report write failed");
}

}  // namespace panops::cli
