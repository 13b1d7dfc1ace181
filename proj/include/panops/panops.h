/*
 * Copyright 2026 The panops Authors
 * SPDX-License-Identifier: Apache-2.0
 */

/* C interface to libpanops.
 *
 * Objects are opaque handles created by *_create / *_load functions and
 * released with the matching *_destroy. Every fallible call returns a
 * panops_status; on failure panops_last_error() describes the problem for
 * the calling thread. Output handles are only written on success.
 *
 * Angles are radians. Tensors are float32 NCHW. Point arrays are packed
 * (y, x) pairs of doubles.
 */

#ifndef PANOPS_PANOPS_H_
#define PANOPS_PANOPS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(PANOPS_BUILDING_LIBRARY)
#define PANOPS_API __declspec(dllexport)
#else
#define PANOPS_API __declspec(dllimport)
#endif
#else
#define PANOPS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum panops_status {
  PANOPS_OK = 0,
  PANOPS_ERR_ARGUMENT = 1,
  PANOPS_ERR_INDEX = 2,
  PANOPS_ERR_FORMAT = 3,
  PANOPS_ERR_IO = 4,
  PANOPS_ERR_NO_CATEGORIES = 5,
  PANOPS_ERR_INTERNAL = 6
} panops_status;

typedef struct panops_tensor panops_tensor;
typedef struct panops_image panops_image;
typedef struct panops_labels panops_labels;
typedef struct panops_palette panops_palette;
typedef struct panops_confusion panops_confusion;
typedef struct panops_similarity panops_similarity;
typedef struct panops_taxonomy panops_taxonomy;

PANOPS_API const char* panops_version(void);
PANOPS_API const char* panops_status_string(panops_status status);
/* Message of the last failed call on this thread ("" if none). */
PANOPS_API const char* panops_last_error(void);
/* Byte offset attached to the last format error, or -1. */
PANOPS_API int64_t panops_last_error_offset(void);
/* 0 selects all hardware threads. Results do not depend on the count. */
PANOPS_API void panops_set_num_threads(size_t count);

/* ---- tensors ---------------------------------------------------------- */

typedef enum panops_border { PANOPS_BORDER_ZERO = 0, PANOPS_BORDER_CLAMP = 1 } panops_border;

/* data may be NULL for a zero tensor; otherwise it holds prod(shape) floats. */
PANOPS_API panops_status panops_tensor_create(const uint64_t shape[4], const float* data, panops_tensor** out);
/* Uniform values in [lo, hi) from a seeded generator. */
PANOPS_API panops_status panops_tensor_random(const uint64_t shape[4], uint64_t seed, float lo, float hi,
                                              panops_tensor** out);
PANOPS_API void panops_tensor_destroy(panops_tensor* t);
PANOPS_API void panops_tensor_shape(const panops_tensor* t, uint64_t shape[4]);
PANOPS_API const float* panops_tensor_data(const panops_tensor* t);
PANOPS_API panops_status panops_tensor_load(const char* path, panops_tensor** out);
PANOPS_API panops_status panops_tensor_save(const panops_tensor* t, const char* path);

PANOPS_API panops_status panops_bilinear_sample(const panops_tensor* t, uint64_t n, uint64_t c, double y, double x,
                                                panops_border border, double* out);
PANOPS_API panops_status panops_conv2d_reference(const panops_tensor* x, const float* kernel, size_t kernel_h,
                                                 size_t kernel_w, size_t dilation, panops_tensor** out);

/* ---- deformable operators --------------------------------------------- */

typedef enum panops_variant { PANOPS_DCN = 1, PANOPS_DCNV2 = 2, PANOPS_DCNV3 = 3 } panops_variant;

typedef enum panops_param {
  PANOPS_PARAM_INPUT = 0,
  PANOPS_PARAM_WEIGHTS = 1,
  PANOPS_PARAM_OFFSETS = 2,
  PANOPS_PARAM_MODULATION = 3
} panops_param;

/* Weights: (C_out, C_in, kh, kw) for DCN/DCNv2, (C, C/groups, 1, 1) for
 * DCNv3/DAO. Offsets: (n, 2*K*G, h, w) as (dy, dx) pairs, group-major then
 * tap-major. Modulation: (n, K*G, h, w). */
typedef struct panops_deform_config {
  uint32_t kernel_h;
  uint32_t kernel_w;
  uint32_t dilation;
  uint32_t groups;
} panops_deform_config;

/* modulation must be NULL for PANOPS_DCN and non-NULL otherwise. */
PANOPS_API panops_status panops_deform_forward(panops_variant variant, const panops_deform_config* cfg,
                                               const panops_tensor* x, const panops_tensor* weights,
                                               const panops_tensor* offsets, const panops_tensor* modulation,
                                               panops_tensor** out);
PANOPS_API panops_status panops_dcn_forward(const panops_deform_config* cfg, const panops_tensor* x,
                                            const panops_tensor* weights, const panops_tensor* offsets,
                                            panops_tensor** out);
PANOPS_API panops_status panops_dcnv2_forward(const panops_deform_config* cfg, const panops_tensor* x,
                                              const panops_tensor* weights, const panops_tensor* offsets,
                                              const panops_tensor* modulation, panops_tensor** out);
PANOPS_API panops_status panops_dcnv3_forward(const panops_deform_config* cfg, const panops_tensor* x,
                                              const panops_tensor* weights, const panops_tensor* offsets,
                                              const panops_tensor* modulation, panops_tensor** out);
/* Same expression as DCNv3. */
PANOPS_API panops_status panops_dcnv4_forward(const panops_deform_config* cfg, const panops_tensor* x,
                                              const panops_tensor* weights, const panops_tensor* offsets,
                                              const panops_tensor* modulation, panops_tensor** out);
/* out_salient receives the (n, 1, h, w) salient map; it may be NULL. */
PANOPS_API panops_status panops_dao_forward(const panops_deform_config* cfg, const panops_tensor* x,
                                            const panops_tensor* weights, const panops_tensor* offsets,
                                            const panops_tensor* modulation, uint32_t salience_kernel,
                                            panops_tensor** out_y, panops_tensor** out_salient);

/* Gradients of sum(upstream * forward), rounded to float32. Any output
 * pointer may be NULL; grad_modulation is set to NULL for PANOPS_DCN. */
PANOPS_API panops_status panops_deform_backward(panops_variant variant, const panops_deform_config* cfg,
                                                const panops_tensor* x, const panops_tensor* weights,
                                                const panops_tensor* offsets, const panops_tensor* modulation,
                                                const panops_tensor* upstream, panops_tensor** grad_x,
                                                panops_tensor** grad_weights, panops_tensor** grad_offsets,
                                                panops_tensor** grad_modulation);
/* Central differences of sum(forward) with respect to one parameter. */
PANOPS_API panops_status panops_fd_gradient(panops_variant variant, const panops_deform_config* cfg,
                                            const panops_tensor* x, const panops_tensor* weights,
                                            const panops_tensor* offsets, const panops_tensor* modulation,
                                            panops_param which, double step, panops_tensor** out);

typedef struct panops_random_case_spec {
  uint64_t shape[4];
  uint32_t kernel;
  uint32_t dilation;
  uint32_t groups;
  double offset_range;
  double breakpoint_margin;
} panops_random_case_spec;

PANOPS_API void panops_random_case_spec_default(panops_random_case_spec* spec);

typedef struct panops_gradcheck_report {
  double input;
  double weights;
  double offsets;
  double modulation;
  double max;
} panops_gradcheck_report;

/* Builds a seeded random instance and compares analytic gradients with
 * central differences of the given step. */
PANOPS_API panops_status panops_gradcheck_random(panops_variant variant, const panops_random_case_spec* spec,
                                                 uint64_t seed, double step, panops_gradcheck_report* report);

/* Traces K^L sampling points. levels[i] pairs cfgs[i] with offsets[i]
 * (batch 0, group 0 is used). Call with points == NULL to query count. */
PANOPS_API panops_status panops_trace_receptive_field(const panops_deform_config* cfgs,
                                                      const panops_tensor* const* offsets, size_t levels,
                                                      double anchor_y, double anchor_x, double* points,
                                                      size_t capacity, size_t* count);

/* ---- salience --------------------------------------------------------- */

PANOPS_API panops_status panops_patch_cosine_similarity(const panops_tensor* f, uint32_t kernel, panops_tensor** out);
PANOPS_API panops_status panops_salient_map(const panops_tensor* f, uint32_t kernel, panops_tensor** out);
PANOPS_API double panops_salience_upper_bound(uint32_t kernel);

/* ---- panorama geometry ------------------------------------------------ */

typedef struct panops_erp_params {
  double radius;
  double lambda0;
  double phi0;
  double phi1;
} panops_erp_params;

typedef enum panops_interpolation { PANOPS_BILINEAR = 0, PANOPS_NEAREST = 1 } panops_interpolation;

typedef struct panops_warp_spec {
  double fov_h;
  double fov_v;
  uint32_t out_h; /* 0 = input size */
  uint32_t out_w;
  uint8_t fill;
  panops_interpolation interpolation;
} panops_warp_spec;

PANOPS_API void panops_erp_params_default(panops_erp_params* params);
PANOPS_API void panops_warp_spec_default(panops_warp_spec* spec);
PANOPS_API panops_status panops_erp_forward(double lambda, double phi, const panops_erp_params* params, double* x,
                                            double* y);
PANOPS_API panops_status panops_erp_inverse(double x, double y, const panops_erp_params* params, double* lambda,
                                            double* phi);
/* params may be NULL for the defaults. */
PANOPS_API panops_status panops_warp_pinhole_to_erp(const panops_image* image, const panops_warp_spec* spec,
                                                    const panops_erp_params* params, panops_image** out);
PANOPS_API panops_status panops_warp_labels_to_erp(const panops_labels* labels, const panops_warp_spec* spec,
                                                   const panops_erp_params* params, panops_labels** out);
/* permutation must hold grid*grid entries. labels/out_labels/out_shuffled may be NULL. */
PANOPS_API panops_status panops_rerp_augment(const panops_image* image, const panops_labels* labels, uint32_t grid,
                                             uint64_t seed, const panops_warp_spec* spec,
                                             const panops_erp_params* params, panops_image** out_image,
                                             panops_labels** out_labels, panops_image** out_shuffled,
                                             uint32_t* permutation);
PANOPS_API panops_status panops_horizontal_rotate(const panops_image* image, int64_t shift, panops_image** out);
PANOPS_API panops_status panops_labels_horizontal_rotate(const panops_labels* labels, int64_t shift,
                                                         panops_labels** out);

/* ---- images and label maps -------------------------------------------- */

PANOPS_API panops_status panops_image_create(uint32_t height, uint32_t width, uint32_t channels,
                                             const uint8_t* pixels, panops_image** out);
PANOPS_API void panops_image_destroy(panops_image* image);
PANOPS_API void panops_image_info(const panops_image* image, uint32_t* height, uint32_t* width, uint32_t* channels);
PANOPS_API const uint8_t* panops_image_data(const panops_image* image);
PANOPS_API panops_status panops_image_load(const char* path, panops_image** out);
PANOPS_API panops_status panops_image_save(const panops_image* image, const char* path);

PANOPS_API panops_status panops_labels_create(uint32_t height, uint32_t width, const uint8_t* ids,
                                              panops_labels** out);
PANOPS_API void panops_labels_destroy(panops_labels* labels);
PANOPS_API void panops_labels_info(const panops_labels* labels, uint32_t* height, uint32_t* width);
PANOPS_API const uint8_t* panops_labels_data(const panops_labels* labels);
/* Raw id maps as single-channel PNG. */
PANOPS_API panops_status panops_labels_load(const char* path, panops_labels** out);
PANOPS_API panops_status panops_labels_save(const panops_labels* labels, const char* path);

PANOPS_API panops_status panops_palette_load(const char* path, panops_palette** out);
PANOPS_API void panops_palette_destroy(panops_palette* palette);
PANOPS_API size_t panops_palette_size(const panops_palette* palette);
PANOPS_API panops_status panops_encode_labels(const panops_labels* labels, const panops_palette* palette,
                                              panops_image** out);
PANOPS_API panops_status panops_decode_labels(const panops_image* image, const panops_palette* palette,
                                              panops_labels** out);

typedef struct panops_render_stats {
  size_t anchors_drawn;
  size_t offsets_drawn;
  size_t clipped;
} panops_render_stats;

PANOPS_API panops_status panops_render_offsets(const panops_image* base, const double* anchors, size_t anchor_count,
                                               const double* offsets, size_t offset_count, panops_image** out,
                                               panops_render_stats* stats);

/* ---- metrics ---------------------------------------------------------- */

PANOPS_API panops_status panops_confusion_create(uint32_t classes, panops_confusion** out);
PANOPS_API void panops_confusion_destroy(panops_confusion* m);
PANOPS_API panops_status panops_confusion_accumulate(panops_confusion* m, const panops_labels* pred,
                                                     const panops_labels* gt);
PANOPS_API uint32_t panops_confusion_classes(const panops_confusion* m);
PANOPS_API uint64_t panops_confusion_get(const panops_confusion* m, uint32_t gt, uint32_t pred);
PANOPS_API uint64_t panops_confusion_total(const panops_confusion* m);

/* per_class holds classes() entries; NaN marks categories with empty union. */
PANOPS_API panops_status panops_miou(const panops_confusion* m, double* per_class, double* mean);
PANOPS_API panops_status panops_open_miou(const panops_confusion* m, const panops_similarity* s, double* per_class,
                                          double* mean);

PANOPS_API panops_status panops_similarity_create(size_t count, const char* const* names, const double* values,
                                                  panops_similarity** out);
PANOPS_API panops_status panops_similarity_identity(uint32_t classes, panops_similarity** out);
PANOPS_API panops_status panops_similarity_load(const char* path, panops_similarity** out);
PANOPS_API panops_status panops_similarity_save(const panops_similarity* s, const char* path);
PANOPS_API void panops_similarity_destroy(panops_similarity* s);
PANOPS_API size_t panops_similarity_size(const panops_similarity* s);
PANOPS_API const char* panops_similarity_name(const panops_similarity* s, size_t i);
PANOPS_API double panops_similarity_value(const panops_similarity* s, size_t i, size_t j);

PANOPS_API panops_status panops_taxonomy_load(const char* path, panops_taxonomy** out);
PANOPS_API panops_status panops_taxonomy_parse(const char* text, panops_taxonomy** out);
PANOPS_API void panops_taxonomy_destroy(panops_taxonomy* t);
PANOPS_API panops_status panops_wup_similarity(const panops_taxonomy* t, const char* a, const char* b, double* out);
PANOPS_API panops_status panops_similarity_from_taxonomy(const panops_taxonomy* t, const char* const* categories,
                                                         size_t count, panops_similarity** out);

#ifdef __cplusplus
}
#endif

#endif /* PANOPS_PANOPS_H_ */
