// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "panops/image.hpp"

namespace panops::imgio {

using Rgb = std::array<std::uint8_t, 3>;

/// Reads an 8-bit gray or RGB PNG. Palette images are expanded to RGB, alpha
/// is dropped and sub-byte gray is widened; 16-bit samples are rejected.
Image load_image(const std::filesystem::path& path);
void save_image(const Image& image, const std::filesystem::path& path);

/// Raw id maps are single-channel 8-bit PNGs.
LabelMap load_label_map(const std::filesystem::path& path);
void save_label_map(const LabelMap& labels, const std::filesystem::path& path);

LabelMap label_map_from_image(const Image& gray);
Image label_map_to_image(const LabelMap& labels);

struct PaletteEntry {
  std::string name;
  Rgb color{};
};

/// Category colours, id = position. Black is reserved for the ignore id.
class Palette {
 public:
  Palette() = default;
  explicit Palette(std::vector<PaletteEntry> entries);

  /// CSV rows "name,r,g,b".
  static Palette load_csv(const std::filesystem::path& path);
  static Palette parse_csv(const std::string& text);

  std::size_t size() const noexcept { return entries_.size(); }
  const PaletteEntry& operator[](std::size_t id) const { return entries_.at(id); }
  const std::vector<PaletteEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<PaletteEntry> entries_;
};

inline constexpr Rgb kIgnoreColor{0, 0, 0};

Image encode_labels(const LabelMap& labels, const Palette& palette);
LabelMap decode_labels(const Image& image, const Palette& palette);

struct PixelPoint {
  double y = 0.0;
  double x = 0.0;
};

struct RenderResult {
  Image image;
  std::size_t anchors_drawn = 0;
  std::size_t offsets_drawn = 0;
  std::size_t clipped = 0;
};

inline constexpr Rgb kAnchorColor{0, 255, 0};
inline constexpr Rgb kOffsetColor{255, 0, 0};

/// Draws anchors as green 3x3 squares, then offsets as red 2x2 squares, on an
/// RGB copy of `base`. Points outside the image are skipped and counted.
RenderResult render_offsets(const Image& base, std::span<const PixelPoint> anchors,
                            std::span<const PixelPoint> offsets);

}  // namespace panops::imgio
