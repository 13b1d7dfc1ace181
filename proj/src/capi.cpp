// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "panops/panops.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

#include "panops/deform.hpp"
#include "panops/imgio.hpp"
#include "panops/metrics.hpp"
#include "panops/panogeom.hpp"
#include "panops/salience.hpp"
#include "panops/tensor.hpp"
#include "panops/threading.hpp"
#include "random.hpp"

struct panops_tensor {
  panops::Tensor value;
};
struct panops_image {
  panops::Image value;
};
struct panops_labels {
  panops::LabelMap value;
};
struct panops_palette {
  panops::imgio::Palette value;
};
struct panops_confusion {
  panops::metrics::ConfusionMatrix value;
};
struct panops_similarity {
  panops::metrics::SimilarityMatrix value;
};
struct panops_taxonomy {
  panops::metrics::Taxonomy value;
};

namespace {

using namespace panops;

thread_local std::string g_error;
thread_local std::int64_t g_error_offset = -1;

panops_status fail(panops_status status, const char* what, std::int64_t offset = -1) {
  g_error = what;
  g_error_offset = offset;
  return status;
}

template <typename Fn>
panops_status guarded(Fn&& fn) noexcept {
  try {
    g_error.clear();
    g_error_offset = -1;
    fn();
    return PANOPS_OK;
  } catch (const FormatError& e) {
    return fail(PANOPS_ERR_FORMAT, e.what(), e.offset());
  } catch (const ArgumentError& e) {
    return fail(PANOPS_ERR_ARGUMENT, e.what());
  } catch (const IndexError& e) {
    return fail(PANOPS_ERR_INDEX, e.what());
  } catch (const IoError& e) {
    return fail(PANOPS_ERR_IO, e.what());
  } catch (const NoCategoriesError& e) {
    return fail(PANOPS_ERR_NO_CATEGORIES, e.what());
  } catch (const std::exception& e) {
    return fail(PANOPS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PANOPS_ERR_INTERNAL, "unknown error");
  }
}

template <typename T>
const T& require(const T* p, const char* what) {
  if (p == nullptr) throw ArgumentError(std::string(what) + " must not be NULL");
  return *p;
}

const char* require_str(const char* p, const char* what) {
  if (p == nullptr) throw ArgumentError(std::string(what) + " must not be NULL");
  return p;
}

template <typename T>
void require_out(T** out) {
  if (out == nullptr) throw ArgumentError("output pointer must not be NULL");
}

Shape to_shape(const uint64_t shape[4]) {
  if (shape == nullptr) throw ArgumentError("shape must not be NULL");
  return Shape{shape[0], shape[1], shape[2], shape[3]};
}

panops_tensor* wrap(Tensor t) { return new panops_tensor{std::move(t)}; }
panops_image* wrap(Image i) { return new panops_image{std::move(i)}; }
panops_labels* wrap(LabelMap l) { return new panops_labels{std::move(l)}; }

deform::Variant to_variant(panops_variant v) {
  switch (v) {
    case PANOPS_DCN: return deform::Variant::kV1;
    case PANOPS_DCNV2: return deform::Variant::kV2;
    case PANOPS_DCNV3: return deform::Variant::kV3;
  }
  throw ArgumentError("unknown deformable variant " + std::to_string(static_cast<int>(v)));
}

deform::DeformInputs make_inputs(const panops_deform_config* cfg, const panops_tensor* x,
                                 const panops_tensor* weights, const panops_tensor* offsets,
                                 const panops_tensor* modulation) {
  const auto& c = require(cfg, "config");
  deform::DeformInputs in;
  in.x = require(x, "x").value;
  in.params.kernel_h = c.kernel_h;
  in.params.kernel_w = c.kernel_w;
  in.params.dilation = c.dilation;
  in.params.groups = c.groups;
  in.params.weights = require(weights, "weights").value;
  in.offsets = require(offsets, "offsets").value;
  if (modulation) in.modulation = modulation->value;
  return in;
}

Tensor to_float(const TensorD& t) { return t.cast<float>(); }

pano::ErpParams erp_from(const panops_erp_params* p) {
  pano::ErpParams e;
  if (p) {
    e.radius = p->radius;
    e.lambda0 = p->lambda0;
    e.phi0 = p->phi0;
    e.phi1 = p->phi1;
  }
  return e;
}

pano::WarpSpec warp_from(const panops_warp_spec* s) {
  const auto& spec = require(s, "warp spec");
  pano::WarpSpec w;
  w.fov_h = spec.fov_h;
  w.fov_v = spec.fov_v;
  w.out_h = spec.out_h;
  w.out_w = spec.out_w;
  w.fill = spec.fill;
  w.interpolation = spec.interpolation == PANOPS_NEAREST ? pano::Interpolation::kNearest
                                                         : pano::Interpolation::kBilinear;
  return w;
}

std::vector<imgio::PixelPoint> points_from(const double* yx, std::size_t count) {
  if (count > 0 && yx == nullptr) throw ArgumentError("point array must not be NULL");
  std::vector<imgio::PixelPoint> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = {yx[2 * i], yx[2 * i + 1]};
  return out;
}

void write_iou(const metrics::IouResult& r, double* per_class, double* mean) {
  if (per_class)
    for (std::size_t c = 0; c < r.per_class.size(); ++c)
      per_class[c] = r.per_class[c] ? *r.per_class[c] : std::numeric_limits<double>::quiet_NaN();
  if (mean) *mean = r.mean;
}

}  // namespace

extern "C" {

const char* panops_version(void) { return "1.0.0"; }

const char* panops_status_string(panops_status status) {
  switch (status) {
    case PANOPS_OK: return "ok";
    case PANOPS_ERR_ARGUMENT: return "argument error";
    case PANOPS_ERR_INDEX: return "index error";
    case PANOPS_ERR_FORMAT: return "format error";
    case PANOPS_ERR_IO: return "i/o error";
    case PANOPS_ERR_NO_CATEGORIES: return "no categories present";
    case PANOPS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* panops_last_error(void) { return g_error.c_str(); }
int64_t panops_last_error_offset(void) { return g_error_offset; }
void panops_set_num_threads(size_t count) { set_num_threads(count); }

// ---- tensors

panops_status panops_tensor_create(const uint64_t shape[4], const float* data, panops_tensor** out) {
  return guarded([&] {
    require_out(out);
    const Shape s = to_shape(shape);
    if (s.n == 0 || s.c == 0 || s.h == 0 || s.w == 0) throw ArgumentError("tensor dimensions must be >= 1");
    *out = data ? wrap(Tensor(s, std::vector<float>(data, data + s.numel()))) : wrap(Tensor(s));
  });
}

panops_status panops_tensor_random(const uint64_t shape[4], uint64_t seed, float lo, float hi, panops_tensor** out) {
  return guarded([&] {
    require_out(out);
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw ArgumentError("random range must satisfy lo < hi");
    const Shape s = to_shape(shape);
    Tensor t(s);
    std::mt19937_64 rng(seed);
    // Rounding to float can reach hi; redraw to keep the interval half-open.
    for (float& v : t.data()) {
      do {
        v = static_cast<float>(detail::uniform(rng, lo, hi));
      } while (v >= hi);
    }
    *out = wrap(std::move(t));
  });
}

void panops_tensor_destroy(panops_tensor* t) { delete t; }

void panops_tensor_shape(const panops_tensor* t, uint64_t shape[4]) {
  if (!t || !shape) return;
  const Shape& s = t->value.shape();
  shape[0] = s.n;
  shape[1] = s.c;
  shape[2] = s.h;
  shape[3] = s.w;
}

const float* panops_tensor_data(const panops_tensor* t) { return t ? t->value.data().data() : nullptr; }

panops_status panops_tensor_load(const char* path, panops_tensor** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(load_tensor(require_str(path, "path")));
  });
}

panops_status panops_tensor_save(const panops_tensor* t, const char* path) {
  return guarded([&] { save_tensor(require(t, "tensor").value, require_str(path, "path")); });
}

panops_status panops_bilinear_sample(const panops_tensor* t, uint64_t n, uint64_t c, double y, double x,
                                     panops_border border, double* out) {
  return guarded([&] {
    if (!out) throw ArgumentError("output pointer must not be NULL");
    *out = bilinear_sample(require(t, "tensor").value, n, c, y, x,
                           border == PANOPS_BORDER_CLAMP ? BorderPolicy::kClampToEdge : BorderPolicy::kZeroFill);
  });
}

panops_status panops_conv2d_reference(const panops_tensor* x, const float* kernel, size_t kernel_h, size_t kernel_w,
                                      size_t dilation, panops_tensor** out) {
  return guarded([&] {
    require_out(out);
    if (!kernel) throw ArgumentError("kernel must not be NULL");
    *out = wrap(conv2d_reference(require(x, "x").value, std::span<const float>(kernel, kernel_h * kernel_w), kernel_h,
                                 kernel_w, dilation));
  });
}

// ---- deformable operators

panops_status panops_deform_forward(panops_variant variant, const panops_deform_config* cfg, const panops_tensor* x,
                                    const panops_tensor* weights, const panops_tensor* offsets,
                                    const panops_tensor* modulation, panops_tensor** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(deform::forward(to_variant(variant), make_inputs(cfg, x, weights, offsets, modulation)));
  });
}

panops_status panops_dcn_forward(const panops_deform_config* cfg, const panops_tensor* x, const panops_tensor* weights,
                                 const panops_tensor* offsets, panops_tensor** out) {
  return panops_deform_forward(PANOPS_DCN, cfg, x, weights, offsets, nullptr, out);
}

panops_status panops_dcnv2_forward(const panops_deform_config* cfg, const panops_tensor* x,
                                   const panops_tensor* weights, const panops_tensor* offsets,
                                   const panops_tensor* modulation, panops_tensor** out) {
  if (!modulation) return fail(PANOPS_ERR_ARGUMENT, "dcnv2: modulation must not be NULL");
  return panops_deform_forward(PANOPS_DCNV2, cfg, x, weights, offsets, modulation, out);
}

panops_status panops_dcnv3_forward(const panops_deform_config* cfg, const panops_tensor* x,
                                   const panops_tensor* weights, const panops_tensor* offsets,
                                   const panops_tensor* modulation, panops_tensor** out) {
  if (!modulation) return fail(PANOPS_ERR_ARGUMENT, "dcnv3: modulation must not be NULL");
  return panops_deform_forward(PANOPS_DCNV3, cfg, x, weights, offsets, modulation, out);
}

panops_status panops_dcnv4_forward(const panops_deform_config* cfg, const panops_tensor* x,
                                   const panops_tensor* weights, const panops_tensor* offsets,
                                   const panops_tensor* modulation, panops_tensor** out) {
  return panops_dcnv3_forward(cfg, x, weights, offsets, modulation, out);
}

panops_status panops_dao_forward(const panops_deform_config* cfg, const panops_tensor* x, const panops_tensor* weights,
                                 const panops_tensor* offsets, const panops_tensor* modulation,
                                 uint32_t salience_kernel, panops_tensor** out_y, panops_tensor** out_salient) {
  return guarded([&] {
    require_out(out_y);
    const auto in = make_inputs(cfg, x, weights, offsets, &require(modulation, "modulation"));
    auto r = deform::dao_forward(in.x, in.params, in.offsets, *in.modulation, salience_kernel);
    *out_y = wrap(std::move(r.y));
    if (out_salient) *out_salient = wrap(std::move(r.salient));
  });
}

panops_status panops_deform_backward(panops_variant variant, const panops_deform_config* cfg, const panops_tensor* x,
                                     const panops_tensor* weights, const panops_tensor* offsets,
                                     const panops_tensor* modulation, const panops_tensor* upstream,
                                     panops_tensor** grad_x, panops_tensor** grad_weights,
                                     panops_tensor** grad_offsets, panops_tensor** grad_modulation) {
  return guarded([&] {
    auto g = deform::deform_backward(to_variant(variant), make_inputs(cfg, x, weights, offsets, modulation),
                                     require(upstream, "upstream").value);
    if (grad_x) *grad_x = wrap(to_float(g.x));
    if (grad_weights) *grad_weights = wrap(to_float(g.weights));
    if (grad_offsets) *grad_offsets = wrap(to_float(g.offsets));
    if (grad_modulation) *grad_modulation = g.modulation ? wrap(to_float(*g.modulation)) : nullptr;
  });
}

panops_status panops_fd_gradient(panops_variant variant, const panops_deform_config* cfg, const panops_tensor* x,
                                 const panops_tensor* weights, const panops_tensor* offsets,
                                 const panops_tensor* modulation, panops_param which, double step,
                                 panops_tensor** out) {
  return guarded([&] {
    require_out(out);
    deform::Param p;
    switch (which) {
      case PANOPS_PARAM_INPUT: p = deform::Param::kInput; break;
      case PANOPS_PARAM_WEIGHTS: p = deform::Param::kWeights; break;
      case PANOPS_PARAM_OFFSETS: p = deform::Param::kOffsets; break;
      case PANOPS_PARAM_MODULATION: p = deform::Param::kModulation; break;
      default: throw ArgumentError("unknown parameter selector");
    }
    *out = wrap(to_float(
        deform::fd_gradient(to_variant(variant), make_inputs(cfg, x, weights, offsets, modulation), p, step)));
  });
}

void panops_random_case_spec_default(panops_random_case_spec* spec) {
  if (!spec) return;
  const deform::RandomCaseSpec d;
  spec->shape[0] = d.input.n;
  spec->shape[1] = d.input.c;
  spec->shape[2] = d.input.h;
  spec->shape[3] = d.input.w;
  spec->kernel = static_cast<uint32_t>(d.kernel);
  spec->dilation = static_cast<uint32_t>(d.dilation);
  spec->groups = static_cast<uint32_t>(d.groups);
  spec->offset_range = d.offset_range;
  spec->breakpoint_margin = d.breakpoint_margin;
}

panops_status panops_gradcheck_random(panops_variant variant, const panops_random_case_spec* spec, uint64_t seed,
                                      double step, panops_gradcheck_report* report) {
  return guarded([&] {
    const auto& s = require(spec, "spec");
    if (!report) throw ArgumentError("report must not be NULL");
    deform::RandomCaseSpec rs;
    rs.input = to_shape(s.shape);
    rs.kernel = s.kernel;
    rs.dilation = s.dilation;
    rs.groups = s.groups;
    rs.offset_range = s.offset_range;
    rs.breakpoint_margin = std::max(s.breakpoint_margin, 2 * step);
    const auto v = to_variant(variant);
    const auto r = deform::gradcheck(v, deform::make_random_case(v, rs, seed), step);
    *report = {r.input, r.weights, r.offsets, r.modulation, r.max()};
  });
}

panops_status panops_trace_receptive_field(const panops_deform_config* cfgs, const panops_tensor* const* offsets,
                                           size_t levels, double anchor_y, double anchor_x, double* points,
                                           size_t capacity, size_t* count) {
  return guarded([&] {
    if (levels > 0 && (!cfgs || !offsets)) throw ArgumentError("level arrays must not be NULL");
    std::vector<deform::TraceLevel> lv;
    for (std::size_t i = 0; i < levels; ++i) {
      deform::TraceLevel l;
      l.params.kernel_h = cfgs[i].kernel_h;
      l.params.kernel_w = cfgs[i].kernel_w;
      l.params.dilation = cfgs[i].dilation;
      l.params.groups = cfgs[i].groups;
      l.offsets = require(offsets[i], "offsets").value;
      lv.push_back(std::move(l));
    }
    const auto pts = deform::trace_receptive_field(lv, {anchor_y, anchor_x});
    if (count) *count = pts.size();
    if (points) {
      if (capacity < pts.size()) throw ArgumentError("point buffer holds " + std::to_string(capacity) +
                                                     " points, need " + std::to_string(pts.size()));
      for (std::size_t i = 0; i < pts.size(); ++i) {
        points[2 * i] = pts[i].y;
        points[2 * i + 1] = pts[i].x;
      }
    }
  });
}

// ---- salience

panops_status panops_patch_cosine_similarity(const panops_tensor* f, uint32_t kernel, panops_tensor** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(salience::patch_cosine_similarity(require(f, "features").value, kernel));
  });
}

panops_status panops_salient_map(const panops_tensor* f, uint32_t kernel, panops_tensor** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(salience::salient_map(require(f, "features").value, kernel));
  });
}

double panops_salience_upper_bound(uint32_t kernel) { return salience::salience_upper_bound(kernel); }

// ---- panorama geometry

void panops_erp_params_default(panops_erp_params* params) {
  if (params) *params = {1.0, 0.0, 0.0, 0.0};
}

void panops_warp_spec_default(panops_warp_spec* spec) {
  if (!spec) return;
  const pano::WarpSpec d;
  *spec = {d.fov_h, d.fov_v, 0, 0, d.fill, PANOPS_BILINEAR};
}

panops_status panops_erp_forward(double lambda, double phi, const panops_erp_params* params, double* x, double* y) {
  return guarded([&] {
    const auto e = erp_from(&require(params, "params"));
    e.validate();
    const auto p = pano::erp_forward(lambda, phi, e);
    if (x) *x = p.x;
    if (y) *y = p.y;
  });
}

panops_status panops_erp_inverse(double x, double y, const panops_erp_params* params, double* lambda, double* phi) {
  return guarded([&] {
    const auto e = erp_from(&require(params, "params"));
    e.validate();
    const auto ll = pano::erp_inverse(x, y, e);
    if (lambda) *lambda = ll.lambda;
    if (phi) *phi = ll.phi;
  });
}

panops_status panops_warp_pinhole_to_erp(const panops_image* image, const panops_warp_spec* spec,
                                         const panops_erp_params* params, panops_image** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(pano::warp_pinhole_to_erp(require(image, "image").value, warp_from(spec), erp_from(params)));
  });
}

panops_status panops_warp_labels_to_erp(const panops_labels* labels, const panops_warp_spec* spec,
                                        const panops_erp_params* params, panops_labels** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(pano::warp_labels_to_erp(require(labels, "labels").value, warp_from(spec), erp_from(params)));
  });
}

panops_status panops_rerp_augment(const panops_image* image, const panops_labels* labels, uint32_t grid,
                                  uint64_t seed, const panops_warp_spec* spec, const panops_erp_params* params,
                                  panops_image** out_image, panops_labels** out_labels, panops_image** out_shuffled,
                                  uint32_t* permutation) {
  return guarded([&] {
    require_out(out_image);
    pano::RerpConfig cfg;
    cfg.grid = grid;
    cfg.seed = seed;
    cfg.warp = warp_from(spec);
    cfg.erp = erp_from(params);
    std::optional<LabelMap> lm;
    if (labels) lm = labels->value;
    auto r = pano::rerp_augment(require(image, "image").value, lm, cfg);
    if (permutation)
      for (std::size_t i = 0; i < r.permutation.size(); ++i) permutation[i] = static_cast<uint32_t>(r.permutation[i]);
    *out_image = wrap(std::move(r.image));
    if (out_labels) *out_labels = r.labels ? wrap(std::move(*r.labels)) : nullptr;
    if (out_shuffled) *out_shuffled = wrap(std::move(r.shuffled));
  });
}

panops_status panops_horizontal_rotate(const panops_image* image, int64_t shift, panops_image** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(pano::horizontal_rotate(require(image, "image").value, shift));
  });
}

panops_status panops_labels_horizontal_rotate(const panops_labels* labels, int64_t shift, panops_labels** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(pano::horizontal_rotate(require(labels, "labels").value, shift));
  });
}

// ---- images and label maps

panops_status panops_image_create(uint32_t height, uint32_t width, uint32_t channels, const uint8_t* pixels,
                                  panops_image** out) {
  return guarded([&] {
    require_out(out);
    if (pixels) {
      const std::size_t n = std::size_t{height} * width * channels;
      *out = wrap(Image(height, width, channels, std::vector<std::uint8_t>(pixels, pixels + n)));
    } else {
      *out = wrap(Image(height, width, channels));
    }
  });
}

void panops_image_destroy(panops_image* image) { delete image; }

void panops_image_info(const panops_image* image, uint32_t* height, uint32_t* width, uint32_t* channels) {
  if (!image) return;
  if (height) *height = static_cast<uint32_t>(image->value.height());
  if (width) *width = static_cast<uint32_t>(image->value.width());
  if (channels) *channels = static_cast<uint32_t>(image->value.channels());
}

const uint8_t* panops_image_data(const panops_image* image) { return image ? image->value.pixels().data() : nullptr; }

panops_status panops_image_load(const char* path, panops_image** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(imgio::load_image(require_str(path, "path")));
  });
}

panops_status panops_image_save(const panops_image* image, const char* path) {
  return guarded([&] { imgio::save_image(require(image, "image").value, require_str(path, "path")); });
}

panops_status panops_labels_create(uint32_t height, uint32_t width, const uint8_t* ids, panops_labels** out) {
  return guarded([&] {
    require_out(out);
    if (ids) {
      const std::size_t n = std::size_t{height} * width;
      *out = wrap(LabelMap(height, width, std::vector<std::uint8_t>(ids, ids + n)));
    } else {
      *out = wrap(LabelMap(height, width));
    }
  });
}

void panops_labels_destroy(panops_labels* labels) { delete labels; }

void panops_labels_info(const panops_labels* labels, uint32_t* height, uint32_t* width) {
  if (!labels) return;
  if (height) *height = static_cast<uint32_t>(labels->value.height());
  if (width) *width = static_cast<uint32_t>(labels->value.width());
}

const uint8_t* panops_labels_data(const panops_labels* labels) { return labels ? labels->value.ids().data() : nullptr; }

panops_status panops_labels_load(const char* path, panops_labels** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(imgio::load_label_map(require_str(path, "path")));
  });
}

panops_status panops_labels_save(const panops_labels* labels, const char* path) {
  return guarded([&] { imgio::save_label_map(require(labels, "labels").value, require_str(path, "path")); });
}

panops_status panops_palette_load(const char* path, panops_palette** out) {
  return guarded([&] {
    require_out(out);
    *out = new panops_palette{imgio::Palette::load_csv(require_str(path, "path"))};
  });
}

void panops_palette_destroy(panops_palette* palette) { delete palette; }

size_t panops_palette_size(const panops_palette* palette) { return palette ? palette->value.size() : 0; }

panops_status panops_encode_labels(const panops_labels* labels, const panops_palette* palette, panops_image** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(imgio::encode_labels(require(labels, "labels").value, require(palette, "palette").value));
  });
}

panops_status panops_decode_labels(const panops_image* image, const panops_palette* palette, panops_labels** out) {
  return guarded([&] {
    require_out(out);
    *out = wrap(imgio::decode_labels(require(image, "image").value, require(palette, "palette").value));
  });
}

panops_status panops_render_offsets(const panops_image* base, const double* anchors, size_t anchor_count,
                                    const double* offsets, size_t offset_count, panops_image** out,
                                    panops_render_stats* stats) {
  return guarded([&] {
    require_out(out);
    const auto a = points_from(anchors, anchor_count);
    const auto o = points_from(offsets, offset_count);
    auto r = imgio::render_offsets(require(base, "base").value, a, o);
    if (stats) *stats = {r.anchors_drawn, r.offsets_drawn, r.clipped};
    *out = wrap(std::move(r.image));
  });
}

// ---- metrics

panops_status panops_confusion_create(uint32_t classes, panops_confusion** out) {
  return guarded([&] {
    require_out(out);
    *out = new panops_confusion{metrics::ConfusionMatrix(classes)};
  });
}

void panops_confusion_destroy(panops_confusion* m) { delete m; }

panops_status panops_confusion_accumulate(panops_confusion* m, const panops_labels* pred, const panops_labels* gt) {
  return guarded([&] {
    if (!m) throw ArgumentError("confusion matrix must not be NULL");
    m->value.accumulate(require(pred, "prediction").value, require(gt, "ground truth").value);
  });
}

uint32_t panops_confusion_classes(const panops_confusion* m) {
  return m ? static_cast<uint32_t>(m->value.classes()) : 0;
}

uint64_t panops_confusion_get(const panops_confusion* m, uint32_t gt, uint32_t pred) {
  if (!m || gt >= m->value.classes() || pred >= m->value.classes()) return 0;
  return m->value(gt, pred);
}

uint64_t panops_confusion_total(const panops_confusion* m) { return m ? m->value.total() : 0; }

panops_status panops_miou(const panops_confusion* m, double* per_class, double* mean) {
  return guarded([&] { write_iou(metrics::miou(require(m, "confusion").value), per_class, mean); });
}

panops_status panops_open_miou(const panops_confusion* m, const panops_similarity* s, double* per_class,
                               double* mean) {
  return guarded([&] {
    write_iou(metrics::open_miou(require(m, "confusion").value, require(s, "similarity").value), per_class, mean);
  });
}

panops_status panops_similarity_create(size_t count, const char* const* names, const double* values,
                                       panops_similarity** out) {
  return guarded([&] {
    require_out(out);
    if (count > 0 && (!names || !values)) throw ArgumentError("names and values must not be NULL");
    std::vector<std::string> n;
    for (std::size_t i = 0; i < count; ++i) n.emplace_back(require_str(names[i], "name"));
    *out = new panops_similarity{metrics::SimilarityMatrix(std::move(n), std::vector<double>(values, values + count * count))};
  });
}

panops_status panops_similarity_identity(uint32_t classes, panops_similarity** out) {
  return guarded([&] {
    require_out(out);
    *out = new panops_similarity{metrics::SimilarityMatrix::identity(classes)};
  });
}

panops_status panops_similarity_load(const char* path, panops_similarity** out) {
  return guarded([&] {
    require_out(out);
    *out = new panops_similarity{metrics::SimilarityMatrix::load_csv(require_str(path, "path"))};
  });
}

panops_status panops_similarity_save(const panops_similarity* s, const char* path) {
  return guarded([&] {
    const std::string csv = require(s, "similarity").value.to_csv();
    std::FILE* f = std::fopen(require_str(path, "path"), "wb");
    if (!f) throw IoError(std::string("cannot open ") + path + " for writing");
    const bool ok = std::fwrite(csv.data(), 1, csv.size(), f) == csv.size();
    if (std::fclose(f) != 0 || !ok) throw IoError(std::string("write failed: ") + path);
  });
}

void panops_similarity_destroy(panops_similarity* s) { delete s; }

size_t panops_similarity_size(const panops_similarity* s) { return s ? s->value.size() : 0; }

const char* panops_similarity_name(const panops_similarity* s, size_t i) {
  if (!s || i >= s->value.size()) return nullptr;
  return s->value.names()[i].c_str();
}

double panops_similarity_value(const panops_similarity* s, size_t i, size_t j) {
  if (!s || i >= s->value.size() || j >= s->value.size()) return std::numeric_limits<double>::quiet_NaN();
  return s->value(i, j);
}

panops_status panops_taxonomy_load(const char* path, panops_taxonomy** out) {
  return guarded([&] {
    require_out(out);
    *out = new panops_taxonomy{metrics::Taxonomy::load(require_str(path, "path"))};
  });
}

panops_status panops_taxonomy_parse(const char* text, panops_taxonomy** out) {
  return guarded([&] {
    require_out(out);
    *out = new panops_taxonomy{metrics::Taxonomy::parse(require_str(text, "text"))};
  });
}

void panops_taxonomy_destroy(panops_taxonomy* t) { delete t; }

panops_status panops_wup_similarity(const panops_taxonomy* t, const char* a, const char* b, double* out) {
  return guarded([&] {
    if (!out) throw ArgumentError("output pointer must not be NULL");
    *out = metrics::wup_similarity(require(t, "taxonomy").value, require_str(a, "a"), require_str(b, "b"));
  });
}

panops_status panops_similarity_from_taxonomy(const panops_taxonomy* t, const char* const* categories, size_t count,
                                              panops_similarity** out) {
  return guarded([&] {
    require_out(out);
    if (count > 0 && !categories) throw ArgumentError("categories must not be NULL");
    std::vector<std::string> cats;
    for (std::size_t i = 0; i < count; ++i) cats.emplace_back(require_str(categories[i], "category"));
    *out = new panops_similarity{metrics::similarity_from_taxonomy(require(t, "taxonomy").value, cats)};
  });
}

}  // extern "C"
