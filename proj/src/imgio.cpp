// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "panops/imgio.hpp"

#include <png.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace panops::imgio {
namespace {

// RAII over libpng's simplified-API control block.
struct PngImage {
  png_image img;
  PngImage() {
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  if (std::FILE* probe = std::fopen(path.string().c_str(), "rb")) {
    std::fclose(probe);
  } else {
    throw IoError(path.string() + ": cannot open for reading");
  }
  PngImage png;
  if (!png_image_begin_read_from_file(&png.img, path.string().c_str()))
    throw FormatError(path.string() + ": not a readable PNG (" + png.img.message + ")");
  if (png.img.format & PNG_FORMAT_FLAG_LINEAR)
    throw FormatError(path.string() + ": unsupported bit depth (16-bit samples)");
  const bool color = (png.img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t channels = color ? 3 : 1;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png.img));
  if (!png_image_finish_read(&png.img, nullptr, pixels.data(), 0, nullptr))
    throw FormatError(path.string() + ": PNG decode failed (" + png.img.message + ")");
  return Image(png.img.height, png.img.width, channels, std::move(pixels));
}

void save_image(const Image& image, const std::filesystem::path& path) {
  if (image.empty()) throw ArgumentError("save_image: empty image");
  PngImage png;
  png.img.width = static_cast<png_uint_32>(image.width());
  png.img.height = static_cast<png_uint_32>(image.height());
  png.img.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png.img, path.string().c_str(), 0, image.pixels().data(), 0, nullptr))
    throw IoError(path.string() + ": PNG write failed (" + png.img.message + ")");
}

LabelMap label_map_from_image(const Image& gray) {
  if (gray.channels() != 1)
    throw FormatError("label map images must be single-channel, got " + std::to_string(gray.channels()) +
                      " channels");
  return LabelMap(gray.height(), gray.width(), std::vector<std::uint8_t>(gray.pixels().begin(), gray.pixels().end()));
}

Image label_map_to_image(const LabelMap& labels) {
  return Image(labels.height(), labels.width(), 1, std::vector<std::uint8_t>(labels.ids().begin(), labels.ids().end()));
}

LabelMap load_label_map(const std::filesystem::path& path) { return label_map_from_image(load_image(path)); }

void save_label_map(const LabelMap& labels, const std::filesystem::path& path) {
  save_image(label_map_to_image(labels), path);
}

Palette::Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() > 255) throw ArgumentError("palette holds at most 255 entries (255 is the ignore id)");
  std::set<std::string> names;
  std::set<Rgb> colors;
  for (const auto& e : entries_) {
    if (e.name.empty()) throw ArgumentError("palette entry with empty name");
    if (!names.insert(e.name).second) throw ArgumentError("duplicate palette name '" + e.name + "'");
    if (e.color == kIgnoreColor) throw ArgumentError("palette colour (0,0,0) is reserved for the ignore id");
    if (!colors.insert(e.color).second) throw ArgumentError("duplicate palette colour for '" + e.name + "'");
  }
}

Palette Palette::parse_csv(const std::string& text) {
  std::vector<PaletteEntry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line, ',');
    if (lineno == 1 && cells.size() == 4 && cells[0] == "name" && cells[1] == "r") continue;
    if (cells.size() != 4) throw FormatError("palette line " + std::to_string(lineno) + ": expected name,r,g,b");
    PaletteEntry e;
    e.name = cells[0];
    for (int i = 0; i < 3; ++i) {
      int v = -1;
      const auto& cell = cells[1 + i];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || v < 0 || v > 255)
        throw FormatError("palette line " + std::to_string(lineno) + ": bad channel value '" + cell + "'");
      e.color[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
    }
    entries.push_back(std::move(e));
  }
  return Palette(std::move(entries));
}

Palette Palette::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

Image encode_labels(const LabelMap& labels, const Palette& palette) {
  Image out(labels.height(), labels.width(), 3);
  for (std::size_t y = 0; y < labels.height(); ++y)
    for (std::size_t x = 0; x < labels.width(); ++x) {
      const std::uint8_t id = labels(y, x);
      Rgb color = kIgnoreColor;
      if (id != LabelMap::kIgnoreId) {
        if (id >= palette.size())
          throw ArgumentError("label id " + std::to_string(id) + " at (" + std::to_string(y) + ", " +
                              std::to_string(x) + ") exceeds palette size " + std::to_string(palette.size()));
        color = palette[id].color;
      }
      for (std::size_t ch = 0; ch < 3; ++ch) out(y, x, ch) = color[ch];
    }
  return out;
}

LabelMap decode_labels(const Image& image, const Palette& palette) {
  if (image.channels() != 3) throw FormatError("colour-coded label images must be RGB");
  std::map<Rgb, std::uint8_t> lookup;
  for (std::size_t i = 0; i < palette.size(); ++i) lookup[palette[i].color] = static_cast<std::uint8_t>(i);
  LabelMap out(image.height(), image.width());
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < image.width(); ++x) {
      const Rgb c{image(y, x, 0), image(y, x, 1), image(y, x, 2)};
      if (c == kIgnoreColor) {
        out(y, x) = LabelMap::kIgnoreId;
        continue;
      }
      const auto it = lookup.find(c);
      if (it == lookup.end())
        throw FormatError("unknown palette colour (" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," +
                          std::to_string(c[2]) + ") at pixel (" + std::to_string(y) + ", " + std::to_string(x) + ")");
      out(y, x) = it->second;
    }
  return out;
}

namespace {

bool locate(const PixelPoint& p, const Image& img, std::int64_t& row, std::int64_t& col) {
  if (!std::isfinite(p.y) || !std::isfinite(p.x)) return false;
  const double ry = std::round(p.y);
  const double rx = std::round(p.x);
  if (ry < 0 || rx < 0 || ry >= static_cast<double>(img.height()) || rx >= static_cast<double>(img.width()))
    return false;
  row = static_cast<std::int64_t>(ry);
  col = static_cast<std::int64_t>(rx);
  return true;
}

void fill_square(Image& img, std::int64_t top, std::int64_t left, std::int64_t size, const Rgb& color) {
  const auto h = static_cast<std::int64_t>(img.height());
  const auto w = static_cast<std::int64_t>(img.width());
  for (std::int64_t y = std::max<std::int64_t>(top, 0); y < std::min(top + size, h); ++y)
    for (std::int64_t x = std::max<std::int64_t>(left, 0); x < std::min(left + size, w); ++x)
      for (std::size_t ch = 0; ch < 3; ++ch)
        img(static_cast<std::size_t>(y), static_cast<std::size_t>(x), ch) = color[ch];
}

}  // namespace

RenderResult render_offsets(const Image& base, std::span<const PixelPoint> anchors,
                            std::span<const PixelPoint> offsets) {
  if (base.empty()) throw ArgumentError("render_offsets: empty base image");
  RenderResult r;
  if (base.channels() == 3) {
    r.image = base;
  } else {
    r.image = Image(base.height(), base.width(), 3);
    for (std::size_t y = 0; y < base.height(); ++y)
      for (std::size_t x = 0; x < base.width(); ++x)
        for (std::size_t ch = 0; ch < 3; ++ch) r.image(y, x, ch) = base(y, x);
  }
  std::int64_t row = 0, col = 0;
  for (const auto& a : anchors) {
    if (!locate(a, r.image, row, col)) {
      ++r.clipped;
      continue;
    }
    fill_square(r.image, row - 1, col - 1, 3, kAnchorColor);
    ++r.anchors_drawn;
  }
  for (const auto& p : offsets) {
    if (!locate(p, r.image, row, col)) {
      ++r.clipped;
      continue;
    }
    // 2x2 block whose centre is nearest the point.
    const auto top = static_cast<std::int64_t>(std::floor(p.y - 0.5));
    const auto left = static_cast<std::int64_t>(std::floor(p.x - 0.5));
    fill_square(r.image, top, left, 2, kOffsetColor);
    ++r.offsets_drawn;
  }
  return r;
}

}  // namespace panops::imgio
