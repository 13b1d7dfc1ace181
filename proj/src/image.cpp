// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "panops/image.hpp"

namespace panops {
namespace {

void check_dims(std::size_t h, std::size_t w, const char* what) {
  if (h == 0 || w == 0) throw ArgumentError(std::string(what) + " dimensions must be >= 1");
}

}  // namespace

Image::Image(std::size_t height, std::size_t width, std::size_t channels, std::uint8_t fill)
    : Image(height, width, channels, std::vector<std::uint8_t>(height * width * channels, fill)) {}

Image::Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<std::uint8_t> pixels)
    : height_(height), width_(width), channels_(channels), pixels_(std::move(pixels)) {
  check_dims(height, width, "image");
  if (channels != 1 && channels != 3) throw ArgumentError("image channels must be 1 or 3");
  if (pixels_.size() != height * width * channels) throw ArgumentError("image pixel buffer size mismatch");
}

LabelMap::LabelMap(std::size_t height, std::size_t width, std::uint8_t fill)
    : LabelMap(height, width, std::vector<std::uint8_t>(height * width, fill)) {}

LabelMap::LabelMap(std::size_t height, std::size_t width, std::vector<std::uint8_t> ids)
    : height_(height), width_(width), ids_(std::move(ids)) {
  check_dims(height, width, "label map");
  if (ids_.size() != height * width) throw ArgumentError("label map buffer size mismatch");
}

}  // namespace panops
