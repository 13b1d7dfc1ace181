// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "panops/tensor.hpp"

namespace panops::deform {

/// v1: per-location weights, no modulation. v2: adds modulation.
/// v3: grouped sampling with a location-independent per-group projection.
enum class Variant { kV1, kV2, kV3 };

struct Offset2 {
  double dy = 0.0;
  double dx = 0.0;
};

/// Kernel geometry plus weights.
///
/// Weight layouts:
///   v1/v2: (C_out, C_in, kh, kw), one weight per tap and channel pair.
///   v3/DAO: (C, C / groups, 1, 1); output channel o belongs to group
///           o / (C / groups) and mixes only the input channels of that group.
struct DeformParams {
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t dilation = 1;
  std::size_t groups = 1;
  Tensor weights;

  std::size_t taps() const noexcept { return kernel_h * kernel_w; }

  /// The dilated kh x kw lattice centred on (0, 0), row-major.
  std::vector<Offset2> base_offsets() const;
};

/// Offsets: (n, 2*K*G, h, w), channel (g*K + k)*2 holds dy, +1 holds dx.
/// Modulation: (n, K*G, h, w), channel g*K + k. Values are used unclamped.
struct DeformInputs {
  Tensor x;
  DeformParams params;
  Tensor offsets;
  std::optional<Tensor> modulation;
};

Tensor dcn_forward(const Tensor& x, const DeformParams& params, const Tensor& offsets);
Tensor dcnv2_forward(const Tensor& x, const DeformParams& params, const Tensor& offsets,
                     const Tensor& modulation);
Tensor dcnv3_forward(const Tensor& x, const DeformParams& params, const Tensor& offsets,
                     const Tensor& modulation);

/// DCNv4 evaluates the same expression as DCNv3.
inline Tensor dcnv4_forward(const Tensor& x, const DeformParams& params, const Tensor& offsets,
                            const Tensor& modulation) {
  return dcnv3_forward(x, params, offsets, modulation);
}

struct DaoResult {
  Tensor y;
  Tensor salient;  ///< (n, 1, h, w)
  Tensor dcnv3;    ///< the un-weighted DCNv3 output
};

/// DCNv3 followed by per-pixel salience weighting: y = s * dcnv3(x), where s
/// is the salient map of the DCNv3 output.
DaoResult dao_forward(const Tensor& x, const DeformParams& params, const Tensor& offsets,
                      const Tensor& modulation, std::size_t salience_kernel = 3);

/// Forward pass for any variant. `modulation` must be set for v2/v3.
Tensor forward(Variant variant, const DeformInputs& in);

/// Gradients of sum(upstream * forward) in double precision.
struct DeformGrads {
  TensorD x;
  TensorD weights;
  TensorD offsets;
  std::optional<TensorD> modulation;  ///< empty for v1
};

/// Analytic gradients. Offset gradients use the bilinear partial derivatives;
/// at integer sampling coordinates the right-limit cell is used.
DeformGrads deform_backward(Variant variant, const DeformInputs& in, const Tensor& upstream_grad);

enum class Param { kInput, kWeights, kOffsets, kModulation };

/// Central differences of sum(forward) with respect to one parameter
/// tensor, evaluated in double precision.
TensorD fd_gradient(Variant variant, const DeformInputs& in, Param which, double step);

/// Maximum of |a - f| / max(|a|, |f|, floor) over all entries.
double max_relative_error(const TensorD& analytic, const TensorD& numeric,
                          double floor = 1e-4);

struct RandomCaseSpec {
  Shape input{1, 2, 4, 4};
  std::size_t kernel = 3;
  std::size_t dilation = 1;
  std::size_t groups = 1;
  double offset_range = 1.5;
  /// Offsets whose fractional part is closer than this to an integer are
  /// redrawn, keeping every sampling coordinate away from bilinear breakpoints.
  double breakpoint_margin = 2e-3;
};

/// Seeded random problem instance (input, weights, offsets, modulation).
DeformInputs make_random_case(Variant variant, const RandomCaseSpec& spec, std::uint64_t seed);

struct GradcheckReport {
  double input = 0.0;
  double weights = 0.0;
  double offsets = 0.0;
  double modulation = 0.0;  ///< 0 for v1
  double max() const noexcept;
};

/// Compares deform_backward (upstream = ones) against fd_gradient.
GradcheckReport gradcheck(Variant variant, const DeformInputs& in, double step = 1e-3);

struct Point2 {
  double y = 0.0;
  double x = 0.0;
};

struct TraceLevel {
  DeformParams params;  ///< only the kernel geometry is used
  Tensor offsets;       ///< (n, 2*K*G, h, w); batch 0, group 0 is traced
};

/// Composes deformable sampling locations over `levels`, starting from the
/// anchor. Returns K_1 * K_2 * ... leaf points, depth-first in tap order.
std::vector<Point2> trace_receptive_field(const std::vector<TraceLevel>& levels, Point2 anchor);

}  // namespace panops::deform
