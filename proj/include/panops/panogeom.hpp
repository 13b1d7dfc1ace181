// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "panops/image.hpp"

namespace panops::pano {

/// Globe radius, central meridian, central parallel and standard parallel.
/// Angles in radians.
struct ErpParams {
  double radius = 1.0;
  double lambda0 = 0.0;
  double phi0 = 0.0;
  double phi1 = 0.0;

  void validate() const;
};

struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;
};

struct LonLat {
  double lambda = 0.0;
  double phi = 0.0;
};

/// x = R (lambda - lambda0) cos(phi1), y = R (phi - phi0).
PlanarPoint erp_forward(double lambda, double phi, const ErpParams& params);
LonLat erp_inverse(double x, double y, const ErpParams& params);

enum class Interpolation { kBilinear, kNearest };

struct WarpSpec {
  double fov_h = std::numbers::pi / 2;
  double fov_v = std::numbers::pi / 2;
  std::size_t out_h = 0;  ///< 0 = same as input
  std::size_t out_w = 0;
  std::uint8_t fill = 0;
  Interpolation interpolation = Interpolation::kBilinear;

  void validate() const;
};

/// Re-renders a pinhole (gnomonic) image on an equirectangular grid spanning
/// the same field of view. Output pixels whose ray leaves the source frustum
/// get `spec.fill`.
Image warp_pinhole_to_erp(const Image& image, const WarpSpec& spec, const ErpParams& params = {});

/// Nearest-neighbour variant for label maps; unmapped pixels get the ignore id.
LabelMap warp_labels_to_erp(const LabelMap& labels, const WarpSpec& spec,
                            const ErpParams& params = {});

struct RerpConfig {
  std::size_t grid = 2;  ///< grid x grid tiles
  std::uint64_t seed = 0;
  WarpSpec warp{};
  ErpParams erp{};
};

struct RerpResult {
  Image image;
  Image shuffled;  ///< tile-shuffled input before warping
  std::optional<LabelMap> labels;
  /// permutation[slot] = index of the source tile placed in that slot.
  std::vector<std::size_t> permutation;
};

/// Tile bounds [begin, end) along one axis; the last tile takes the remainder.
std::vector<std::pair<std::size_t, std::size_t>> tile_bounds(std::size_t extent, std::size_t grid);

/// Uniform permutation of `count` elements from a seeded mt19937_64.
std::vector<std::size_t> seeded_permutation(std::size_t count, std::uint64_t seed);

/// Shuffles grid x grid tiles according to `permutation`. Tiles whose size
/// differs from their destination slot are resampled with nearest neighbour.
Image shuffle_tiles(const Image& image, std::size_t grid, const std::vector<std::size_t>& permutation);
LabelMap shuffle_tiles(const LabelMap& labels, std::size_t grid,
                       const std::vector<std::size_t>& permutation);

/// Random tile shuffle followed by the equirectangular warp.
RerpResult rerp_augment(const Image& image, const std::optional<LabelMap>& labels,
                        const RerpConfig& cfg);

/// Circular column shift; column c moves to (c + shift) mod width.
Image horizontal_rotate(const Image& panorama, std::int64_t shift);
LabelMap horizontal_rotate(const LabelMap& panorama, std::int64_t shift);

}  // namespace panops::pano
