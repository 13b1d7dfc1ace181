// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "panops/panogeom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "parallel.hpp"

namespace panops::pano {

void ErpParams::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ArgumentError("ERP radius must be positive");
  if (!(std::cos(phi1) > 0.0)) throw ArgumentError("ERP standard parallel must satisfy cos(phi1) > 0");
  if (!std::isfinite(lambda0) || !std::isfinite(phi0)) throw ArgumentError("ERP centre must be finite");
}

PlanarPoint erp_forward(double lambda, double phi, const ErpParams& p) {
  return {p.radius * (lambda - p.lambda0) * std::cos(p.phi1), p.radius * (phi - p.phi0)};
}

LonLat erp_inverse(double x, double y, const ErpParams& p) {
  return {x / (p.radius * std::cos(p.phi1)) + p.lambda0, y / p.radius + p.phi0};
}

void WarpSpec::validate() const {
  constexpr double pi = std::numbers::pi;
  if (!(fov_h > 0.0 && fov_h < pi) || !(fov_v > 0.0 && fov_v < pi))
    throw ArgumentError("field of view must lie in (0, 180) degrees");
  if ((out_h == 0) != (out_w == 0)) throw ArgumentError("output size must set both extents or neither");
}

namespace {

// Source-pixel coordinate (row, col) for every output pixel, NaN when the
// ray leaves the source frustum.
struct SourceMap {
  std::size_t out_h, out_w;
  std::vector<double> rows, cols;
};

SourceMap build_source_map(std::size_t src_h, std::size_t src_w, const WarpSpec& spec, const ErpParams& params) {
  spec.validate();
  params.validate();
  SourceMap m;
  m.out_h = spec.out_h ? spec.out_h : src_h;
  m.out_w = spec.out_w ? spec.out_w : src_w;
  m.rows.assign(m.out_h * m.out_w, std::numeric_limits<double>::quiet_NaN());
  m.cols = m.rows;

  const double sh = static_cast<double>(src_h);
  const double sw = static_cast<double>(src_w);
  const double focal_h = (sw / 2) / std::tan(spec.fov_h / 2);
  const double focal_v = (sh / 2) / std::tan(spec.fov_v / 2);
  const double span_x = spec.fov_h * params.radius * std::cos(params.phi1);
  const double span_y = spec.fov_v * params.radius;

  for (std::size_t r = 0; r < m.out_h; ++r)
    for (std::size_t c = 0; c < m.out_w; ++c) {
      const double x = ((static_cast<double>(c) + 0.5) / static_cast<double>(m.out_w) - 0.5) * span_x;
      const double y = ((static_cast<double>(r) + 0.5) / static_cast<double>(m.out_h) - 0.5) * span_y;
      const LonLat ll = erp_inverse(x, y, params);
      const double lon = ll.lambda - params.lambda0;
      const double lat = ll.phi - params.phi0;
      // Gnomonic projection of the ray onto the pinhole image plane.
      const double u = std::tan(lon) * focal_h;
      const double v = std::tan(lat) / std::cos(lon) * focal_v;
      const double col = sw / 2 + u - 0.5;
      const double row = sh / 2 + v - 0.5;
      if (col < -0.5 || col > sw - 0.5 || row < -0.5 || row > sh - 0.5) continue;
      m.rows[r * m.out_w + c] = row;
      m.cols[r * m.out_w + c] = col;
    }
  return m;
}

std::size_t nearest_index(double coord, std::size_t extent) {
  return static_cast<std::size_t>(std::clamp(std::round(coord), 0.0, static_cast<double>(extent - 1)));
}

}  // namespace

Image warp_pinhole_to_erp(const Image& image, const WarpSpec& spec, const ErpParams& params) {
  if (image.empty()) throw ArgumentError("warp: empty image");
  const SourceMap m = build_source_map(image.height(), image.width(), spec, params);
  const std::size_t ch = image.channels();
  Image out(m.out_h, m.out_w, ch, spec.fill);
  const auto h = static_cast<std::int64_t>(image.height());
  const auto w = static_cast<std::int64_t>(image.width());

  detail::parallel_for(m.out_h, [&](std::size_t r) {
    for (std::size_t c = 0; c < m.out_w; ++c) {
      const double row = m.rows[r * m.out_w + c];
      const double col = m.cols[r * m.out_w + c];
      if (std::isnan(row)) continue;
      if (spec.interpolation == Interpolation::kNearest) {
        const std::size_t sy = nearest_index(row, image.height());
        const std::size_t sx = nearest_index(col, image.width());
        for (std::size_t k = 0; k < ch; ++k) out(r, c, k) = image(sy, sx, k);
        continue;
      }
      const double yf = std::floor(row);
      const double xf = std::floor(col);
      const double ly = row - yf;
      const double lx = col - xf;
      auto clamp_y = [&](double v) { return static_cast<std::size_t>(std::clamp<std::int64_t>(static_cast<std::int64_t>(v), 0, h - 1)); };
      auto clamp_x = [&](double v) { return static_cast<std::size_t>(std::clamp<std::int64_t>(static_cast<std::int64_t>(v), 0, w - 1)); };
      const std::size_t y0 = clamp_y(yf), y1 = clamp_y(yf + 1), x0 = clamp_x(xf), x1 = clamp_x(xf + 1);
      for (std::size_t k = 0; k < ch; ++k) {
        const double v = (1 - ly) * (1 - lx) * image(y0, x0, k) + (1 - ly) * lx * image(y0, x1, k) +
                         ly * (1 - lx) * image(y1, x0, k) + ly * lx * image(y1, x1, k);
        out(r, c, k) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  });
  return out;
}

LabelMap warp_labels_to_erp(const LabelMap& labels, const WarpSpec& spec, const ErpParams& params) {
  if (labels.size() == 0) throw ArgumentError("warp: empty label map");
  const SourceMap m = build_source_map(labels.height(), labels.width(), spec, params);
  LabelMap out(m.out_h, m.out_w, LabelMap::kIgnoreId);
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    if (std::isnan(m.rows[i])) continue;
    out.ids()[i] = labels(nearest_index(m.rows[i], labels.height()), nearest_index(m.cols[i], labels.width()));
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> tile_bounds(std::size_t extent, std::size_t grid) {
  if (grid == 0) throw ArgumentError("grid must be >= 1");
  if (extent < grid)
    throw ArgumentError("extent " + std::to_string(extent) + " is smaller than the grid " + std::to_string(grid));
  const std::size_t base = extent / grid;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < grid; ++i) out.emplace_back(i * base, i + 1 == grid ? extent : (i + 1) * base);
  return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Unbiased draw in [0, bound) by rejection; independent of the standard
  // library's distribution implementation.
  auto bounded = [&rng](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
      v = rng();
    } while (v >= limit);
    return v % bound;
  };
  std::vector<std::size_t> perm(count);
  for (std::size_t i = 0; i < count; ++i) perm[i] = i;
  for (std::size_t i = count; i > 1; --i) std::swap(perm[i - 1], perm[bounded(i)]);
  return perm;
}

namespace {

void check_permutation(const std::vector<std::size_t>& perm, std::size_t count) {
  if (perm.size() != count) throw ArgumentError("permutation must have grid*grid entries");
  std::vector<bool> seen(count, false);
  for (std::size_t v : perm) {
    if (v >= count || seen[v]) throw ArgumentError("invalid tile permutation");
    seen[v] = true;
  }
}

// Moves tiles of an interleaved (h, w, ch) byte raster.
std::vector<std::uint8_t> shuffle_raster(std::span<const std::uint8_t> src, std::size_t h, std::size_t w,
                                         std::size_t ch, std::size_t grid, const std::vector<std::size_t>& perm) {
  check_permutation(perm, grid * grid);
  const auto rows = tile_bounds(h, grid);
  const auto cols = tile_bounds(w, grid);
  std::vector<std::uint8_t> dst(src.size());
  for (std::size_t slot = 0; slot < perm.size(); ++slot) {
    const auto [dr0, dr1] = rows[slot / grid];
    const auto [dc0, dc1] = cols[slot % grid];
    const auto [sr0, sr1] = rows[perm[slot] / grid];
    const auto [sc0, sc1] = cols[perm[slot] % grid];
    const std::size_t dh = dr1 - dr0, dw = dc1 - dc0, sh = sr1 - sr0, sw = sc1 - sc0;
    for (std::size_t y = 0; y < dh; ++y) {
      const std::size_t sy = sr0 + (dh == sh ? y : std::min(sh - 1, (2 * y + 1) * sh / (2 * dh)));
      for (std::size_t x = 0; x < dw; ++x) {
        const std::size_t sx = sc0 + (dw == sw ? x : std::min(sw - 1, (2 * x + 1) * sw / (2 * dw)));
        for (std::size_t k = 0; k < ch; ++k)
          dst[((dr0 + y) * w + dc0 + x) * ch + k] = src[(sy * w + sx) * ch + k];
      }
    }
  }
  return dst;
}

std::size_t wrap_shift(std::int64_t shift, std::size_t width) {
  const auto w = static_cast<std::int64_t>(width);
  return static_cast<std::size_t>(((shift % w) + w) % w);
}

std::vector<std::uint8_t> rotate_raster(std::span<const std::uint8_t> src, std::size_t h, std::size_t w,
                                        std::size_t ch, std::int64_t shift) {
  const std::size_t s = wrap_shift(shift, w);
  std::vector<std::uint8_t> dst(src.size());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t k = 0; k < ch; ++k) dst[(y * w + (x + s) % w) * ch + k] = src[(y * w + x) * ch + k];
  return dst;
}

}  // namespace

Image shuffle_tiles(const Image& image, std::size_t grid, const std::vector<std::size_t>& permutation) {
  return Image(image.height(), image.width(), image.channels(),
               shuffle_raster(image.pixels(), image.height(), image.width(), image.channels(), grid, permutation));
}

LabelMap shuffle_tiles(const LabelMap& labels, std::size_t grid, const std::vector<std::size_t>& permutation) {
  return LabelMap(labels.height(), labels.width(),
                  shuffle_raster(labels.ids(), labels.height(), labels.width(), 1, grid, permutation));
}

RerpResult rerp_augment(const Image& image, const std::optional<LabelMap>& labels, const RerpConfig& cfg) {
  if (image.empty()) throw ArgumentError("rerp: empty image");
  if (cfg.grid == 0) throw ArgumentError("rerp: grid must be >= 1");
  if (image.height() < cfg.grid || image.width() < cfg.grid)
    throw ArgumentError("rerp: image " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                        " is smaller than the " + std::to_string(cfg.grid) + "x" + std::to_string(cfg.grid) + " grid");
  if (labels && (labels->height() != image.height() || labels->width() != image.width()))
    throw ArgumentError("rerp: label map size differs from image size");
  cfg.warp.validate();
  cfg.erp.validate();

  RerpResult r;
  r.permutation = seeded_permutation(cfg.grid * cfg.grid, cfg.seed);
  r.shuffled = shuffle_tiles(image, cfg.grid, r.permutation);
  r.image = warp_pinhole_to_erp(r.shuffled, cfg.warp, cfg.erp);
  if (labels) {
    WarpSpec label_spec = cfg.warp;
    label_spec.interpolation = Interpolation::kNearest;
    r.labels = warp_labels_to_erp(shuffle_tiles(*labels, cfg.grid, r.permutation), label_spec, cfg.erp);
  }
  return r;
}

Image horizontal_rotate(const Image& panorama, std::int64_t shift) {
  if (panorama.empty()) return panorama;
  return Image(panorama.height(), panorama.width(), panorama.channels(),
               rotate_raster(panorama.pixels(), panorama.height(), panorama.width(), panorama.channels(), shift));
}

LabelMap horizontal_rotate(const LabelMap& panorama, std::int64_t shift) {
  if (panorama.size() == 0) return panorama;
  return LabelMap(panorama.height(), panorama.width(),
                  rotate_raster(panorama.ids(), panorama.height(), panorama.width(), 1, shift));
}

}  // namespace panops::pano
