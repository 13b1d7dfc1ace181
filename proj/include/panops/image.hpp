// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "panops/error.hpp"

namespace panops {

/// 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, std::size_t channels, std::uint8_t fill = 0);
  Image(std::size_t height, std::size_t width, std::size_t channels,
        std::vector<std::uint8_t> pixels);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  std::uint8_t operator()(std::size_t y, std::size_t x, std::size_t ch = 0) const noexcept {
    return pixels_[(y * width_ + x) * channels_ + ch];
  }
  std::uint8_t& operator()(std::size_t y, std::size_t x, std::size_t ch = 0) noexcept {
    return pixels_[(y * width_ + x) * channels_ + ch];
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Per-pixel category ids; kIgnoreId marks pixels excluded from evaluation.
class LabelMap {
 public:
  static constexpr std::uint8_t kIgnoreId = 255;

  LabelMap() = default;
  LabelMap(std::size_t height, std::size_t width, std::uint8_t fill = 0);
  LabelMap(std::size_t height, std::size_t width, std::vector<std::uint8_t> ids);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return ids_.size(); }

  std::span<const std::uint8_t> ids() const noexcept { return ids_; }
  std::span<std::uint8_t> ids() noexcept { return ids_; }

  std::uint8_t operator()(std::size_t y, std::size_t x) const noexcept { return ids_[y * width_ + x]; }
  std::uint8_t& operator()(std::size_t y, std::size_t x) noexcept { return ids_[y * width_ + x]; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> ids_;
};

}  // namespace panops
