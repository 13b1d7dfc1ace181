// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library strictly through its C header.

#include "panops/panops.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("panops_capi_" + name)).string();
}

struct TensorGuard {
  panops_tensor* t = nullptr;
  ~TensorGuard() { panops_tensor_destroy(t); }
};

TEST(CApiTest, VersionAndStatusStrings) {
  EXPECT_STREQ(panops_version(), "1.0.0");
  EXPECT_STRNE(panops_status_string(PANOPS_ERR_FORMAT), panops_status_string(PANOPS_OK));
}

TEST(CApiTest, TensorLifecycleAndErrors) {
  const uint64_t shape[4] = {1, 1, 3, 3};
  const float data[9] = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  TensorGuard t;
  ASSERT_EQ(panops_tensor_create(shape, data, &t.t), PANOPS_OK);
  uint64_t got[4];
  panops_tensor_shape(t.t, got);
  EXPECT_EQ(got[2], 3u);
  EXPECT_EQ(panops_tensor_data(t.t)[4], 4.0f);
  double v = 0;
  ASSERT_EQ(panops_bilinear_sample(t.t, 0, 0, 1.5, 1.5, PANOPS_BORDER_ZERO, &v), PANOPS_OK);
  EXPECT_DOUBLE_EQ(v, 6.0);
  EXPECT_EQ(panops_bilinear_sample(t.t, 0, 2, 0, 0, PANOPS_BORDER_ZERO, &v), PANOPS_ERR_INDEX);

  const uint64_t bad[4] = {1, 0, 3, 3};
  panops_tensor* none = nullptr;
  EXPECT_EQ(panops_tensor_create(bad, nullptr, &none), PANOPS_ERR_ARGUMENT);
  EXPECT_EQ(none, nullptr);
  EXPECT_NE(std::strlen(panops_last_error()), 0u);
  EXPECT_EQ(panops_tensor_create(shape, data, nullptr), PANOPS_ERR_ARGUMENT);

  const std::string path = temp_path("t.ptns");
  ASSERT_EQ(panops_tensor_save(t.t, path.c_str()), PANOPS_OK);
  TensorGuard back;
  ASSERT_EQ(panops_tensor_load(path.c_str(), &back.t), PANOPS_OK);
  EXPECT_EQ(std::memcmp(panops_tensor_data(back.t), data, sizeof data), 0);

  std::ofstream(path, std::ios::binary) << "PTNX";
  EXPECT_EQ(panops_tensor_load(path.c_str(), &none), PANOPS_ERR_FORMAT);
  EXPECT_EQ(panops_last_error_offset(), 0);
  EXPECT_EQ(panops_tensor_load("/nonexistent/t.ptns", &none), PANOPS_ERR_IO);
}

TEST(CApiTest, DeformOperatorsAndDao) {
  const panops_deform_config cfg{3, 3, 1, 1};
  const uint64_t xs[4] = {1, 1, 6, 6}, ws[4] = {1, 1, 1, 1}, os[4] = {1, 18, 6, 6}, ms[4] = {1, 9, 6, 6};
  std::vector<float> ones(36, 2.0f), zeros(18 * 36, 0.0f), mod(9 * 36, 1.0f);
  const float w = 0.5f;
  TensorGuard x, wt, off, m, y3, y4, y, s;
  ASSERT_EQ(panops_tensor_create(xs, ones.data(), &x.t), PANOPS_OK);
  ASSERT_EQ(panops_tensor_create(ws, &w, &wt.t), PANOPS_OK);
  ASSERT_EQ(panops_tensor_create(os, zeros.data(), &off.t), PANOPS_OK);
  ASSERT_EQ(panops_tensor_create(ms, mod.data(), &m.t), PANOPS_OK);
  ASSERT_EQ(panops_dcnv3_forward(&cfg, x.t, wt.t, off.t, m.t, &y3.t), PANOPS_OK);
  ASSERT_EQ(panops_dcnv4_forward(&cfg, x.t, wt.t, off.t, m.t, &y4.t), PANOPS_OK);
  EXPECT_EQ(std::memcmp(panops_tensor_data(y3.t), panops_tensor_data(y4.t), 36 * sizeof(float)), 0);
  EXPECT_FLOAT_EQ(panops_tensor_data(y3.t)[14], 9.0f);  // interior: 9 taps * 0.5 * 2
  ASSERT_EQ(panops_dao_forward(&cfg, x.t, wt.t, off.t, m.t, 3, &y.t, &s.t), PANOPS_OK);
  for (int i = 0; i < 36; ++i) EXPECT_EQ(panops_tensor_data(s.t)[i], 0.0f);

  TensorGuard bad;
  EXPECT_EQ(panops_dcnv3_forward(&cfg, x.t, wt.t, m.t, m.t, &bad.t), PANOPS_ERR_ARGUMENT);
  EXPECT_NE(std::string(panops_last_error()).find("offsets"), std::string::npos);
  EXPECT_EQ(panops_deform_forward(PANOPS_DCN, &cfg, x.t, wt.t, off.t, m.t, &bad.t), PANOPS_ERR_ARGUMENT);
}

TEST(CApiTest, BackwardAndGradcheck) {
  panops_random_case_spec spec;
  panops_random_case_spec_default(&spec);
  EXPECT_EQ(spec.shape[1], 2u);
  for (panops_variant v : {PANOPS_DCN, PANOPS_DCNV2, PANOPS_DCNV3}) {
    panops_gradcheck_report r{};
    ASSERT_EQ(panops_gradcheck_random(v, &spec, 11, 1e-3, &r), PANOPS_OK);
    EXPECT_LT(r.max, 1e-3);
    EXPECT_EQ(r.max, std::max({r.input, r.weights, r.offsets, r.modulation}));
  }
  panops_gradcheck_report r{};
  EXPECT_EQ(panops_gradcheck_random(PANOPS_DCNV2, &spec, 1, 0.0, &r), PANOPS_ERR_ARGUMENT);
}

TEST(CApiTest, TraceNeedsCapacity) {
  const panops_deform_config cfg[2] = {{3, 3, 1, 1}, {3, 3, 1, 1}};
  const uint64_t os[4] = {1, 18, 9, 9};
  TensorGuard a, b;
  ASSERT_EQ(panops_tensor_random(os, 1, -1.0f, 1.0f, &a.t), PANOPS_OK);
  ASSERT_EQ(panops_tensor_random(os, 2, -1.0f, 1.0f, &b.t), PANOPS_OK);
  const panops_tensor* levels[2] = {a.t, b.t};
  size_t count = 0;
  ASSERT_EQ(panops_trace_receptive_field(cfg, levels, 2, 4, 4, nullptr, 0, &count), PANOPS_OK);
  EXPECT_EQ(count, 81u);
  std::vector<double> pts(2 * 81);
  EXPECT_EQ(panops_trace_receptive_field(cfg, levels, 2, 4, 4, pts.data(), 80, &count), PANOPS_ERR_ARGUMENT);
  EXPECT_EQ(panops_trace_receptive_field(cfg, levels, 2, 4, 4, pts.data(), 81, &count), PANOPS_OK);
}

TEST(CApiTest, GeometryImagesAndMetrics) {
  panops_erp_params p;
  panops_erp_params_default(&p);
  double x = 0, y = 0, lam = 0, phi = 0;
  ASSERT_EQ(panops_erp_forward(0.3, -0.2, &p, &x, &y), PANOPS_OK);
  ASSERT_EQ(panops_erp_inverse(x, y, &p, &lam, &phi), PANOPS_OK);
  EXPECT_NEAR(lam, 0.3, 1e-15);
  EXPECT_NEAR(phi, -0.2, 1e-15);

  std::vector<uint8_t> px(8 * 8 * 3);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<uint8_t>(i * 7);
  panops_image* img = nullptr;
  ASSERT_EQ(panops_image_create(8, 8, 3, px.data(), &img), PANOPS_OK);
  panops_warp_spec spec;
  panops_warp_spec_default(&spec);
  panops_image* warped = nullptr;
  panops_image* rerp = nullptr;
  panops_image* shuffled = nullptr;
  ASSERT_EQ(panops_warp_pinhole_to_erp(img, &spec, nullptr, &warped), PANOPS_OK);
  uint32_t perm[1];
  ASSERT_EQ(panops_rerp_augment(img, nullptr, 1, 5, &spec, nullptr, &rerp, nullptr, &shuffled, perm), PANOPS_OK);
  EXPECT_EQ(std::memcmp(panops_image_data(warped), panops_image_data(rerp), px.size()), 0);
  EXPECT_EQ(perm[0], 0u);
  panops_image* too_small = nullptr;
  uint32_t perm81[81];
  EXPECT_EQ(panops_rerp_augment(img, nullptr, 9, 5, &spec, nullptr, &too_small, nullptr, nullptr, perm81),
            PANOPS_ERR_ARGUMENT);
  panops_image_destroy(img);
  panops_image_destroy(warped);
  panops_image_destroy(rerp);
  panops_image_destroy(shuffled);

  const uint8_t gt_ids[4] = {0, 0, 1, 1}, pred_ids[4] = {0, 1, 1, 1};
  panops_labels *gt = nullptr, *pred = nullptr;
  ASSERT_EQ(panops_labels_create(2, 2, gt_ids, &gt), PANOPS_OK);
  ASSERT_EQ(panops_labels_create(2, 2, pred_ids, &pred), PANOPS_OK);
  panops_confusion* m = nullptr;
  ASSERT_EQ(panops_confusion_create(2, &m), PANOPS_OK);
  ASSERT_EQ(panops_confusion_accumulate(m, pred, gt), PANOPS_OK);
  EXPECT_EQ(panops_confusion_get(m, 0, 1), 1u);
  double per[2], mean = 0;
  ASSERT_EQ(panops_miou(m, per, &mean), PANOPS_OK);
  EXPECT_NEAR(mean, 7.0 / 12.0, 1e-15);
  const char* names[2] = {"a", "b"};
  const double vals[4] = {1, 0.5, 0.5, 1};
  panops_similarity* s = nullptr;
  ASSERT_EQ(panops_similarity_create(2, names, vals, &s), PANOPS_OK);
  ASSERT_EQ(panops_open_miou(m, s, per, &mean), PANOPS_OK);
  EXPECT_NEAR(mean, 0.791666666667, 1e-9);
  panops_confusion* empty = nullptr;
  ASSERT_EQ(panops_confusion_create(2, &empty), PANOPS_OK);
  EXPECT_EQ(panops_miou(empty, per, &mean), PANOPS_ERR_NO_CATEGORIES);
  panops_confusion_destroy(empty);
  panops_confusion_destroy(m);
  panops_similarity_destroy(s);
  panops_labels_destroy(gt);
  panops_labels_destroy(pred);

  panops_taxonomy* t = nullptr;
  ASSERT_EQ(panops_taxonomy_parse("r\t-\nv\tr\nw\tr\n", &t), PANOPS_OK);
  double wup = 0;
  ASSERT_EQ(panops_wup_similarity(t, "v", "w", &wup), PANOPS_OK);
  EXPECT_DOUBLE_EQ(wup, 0.5);
  EXPECT_EQ(panops_wup_similarity(t, "v", "nope", &wup), PANOPS_ERR_ARGUMENT);
  panops_taxonomy_destroy(t);
  EXPECT_EQ(panops_taxonomy_parse("a\tb\n", &t), PANOPS_ERR_FORMAT);
}

TEST(CApiTest, NullHandlesAreRejected) {
  panops_tensor* out = nullptr;
  EXPECT_EQ(panops_salient_map(nullptr, 3, &out), PANOPS_ERR_ARGUMENT);
  EXPECT_EQ(panops_image_load(nullptr, nullptr), PANOPS_ERR_ARGUMENT);
  panops_tensor_destroy(nullptr);
  panops_image_destroy(nullptr);
}

}  // namespace
