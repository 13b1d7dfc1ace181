// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "panops/tensor.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "oracles.hpp"

namespace panops {
namespace {

Tensor ramp3x3() { return Tensor(Shape{1, 1, 3, 3}, {0, 1, 2, 3, 4, 5, 6, 7, 8}); }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("panops_tensor_test_" + name);
}

TEST(TensorTest, RejectsEmptyDimsAndNonFiniteValues) {
  EXPECT_THROW(Tensor(Shape{1, 0, 2, 2}), ArgumentError);
  EXPECT_THROW(Tensor(Shape{1, 1, 1, 2}, {1.0f, std::numeric_limits<float>::quiet_NaN()}), ArgumentError);
  EXPECT_THROW(Tensor(Shape{1, 1, 1, 2}, {1.0f, std::numeric_limits<float>::infinity()}), ArgumentError);
  EXPECT_THROW(Tensor(Shape{1, 1, 2, 2}, {1.0f}), ArgumentError);
  EXPECT_THROW(ramp3x3().at(0, 0, 3, 0), IndexError);
}

TEST(BilinearSampleTest, LatticePointsAreExact) {
  const Tensor t = ramp3x3();
  EXPECT_EQ(bilinear_sample(t, 0, 0, 1, 2), 5.0);
  std::mt19937_64 rng(3);
  const Tensor r = oracle::random_tensor(Shape{2, 3, 5, 4}, rng);
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
          EXPECT_EQ(bilinear_sample(r, n, c, double(i), double(j)), double(r(n, c, i, j)));
          EXPECT_EQ(bilinear_sample(r, n, c, double(i), double(j), BorderPolicy::kClampToEdge), double(r(n, c, i, j)));
        }
}

TEST(BilinearSampleTest, HandValues) {
  EXPECT_DOUBLE_EQ(bilinear_sample(ramp3x3(), 0, 0, 1.5, 1.5), 6.0);
  const Tensor one(Shape{1, 1, 1, 1}, {4.0f});
  EXPECT_DOUBLE_EQ(bilinear_sample(one, 0, 0, -0.5, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(bilinear_sample(one, 0, 0, -0.5, 0.0, BorderPolicy::kClampToEdge), 4.0);
  EXPECT_DOUBLE_EQ(bilinear_sample(one, 0, 0, 1e9, -1e9), 0.0);
}

TEST(BilinearSampleTest, MatchesTentOracle) {
  std::mt19937_64 rng(11);
  const Tensor t = oracle::random_tensor(Shape{1, 2, 6, 7}, rng);
  std::uniform_real_distribution<double> coord(-2.0, 8.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double y = coord(rng), x = coord(rng);
    EXPECT_NEAR(bilinear_sample(t, 0, 1, y, x), oracle::tent_sample(t, 0, 1, y, x), 1e-12);
  }
}

TEST(BilinearSampleTest, LinearInTensorValues) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-1.5, 6.5);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor a = oracle::random_tensor(Shape{1, 1, 5, 5}, rng);
    const Tensor b = oracle::random_tensor(Shape{1, 1, 5, 5}, rng);
    const float alpha = 0.75f, beta = -1.25f;
    Tensor mix(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) mix.data()[i] = alpha * a.data()[i] + beta * b.data()[i];
    const double y = coord(rng), x = coord(rng);
    for (auto border : {BorderPolicy::kZeroFill, BorderPolicy::kClampToEdge})
      EXPECT_NEAR(bilinear_sample(mix, 0, 0, y, x, border),
                  alpha * bilinear_sample(a, 0, 0, y, x, border) + beta * bilinear_sample(b, 0, 0, y, x, border), 1e-6);
  }
}

TEST(BilinearSampleTest, Errors) {
  const Tensor t = ramp3x3();
  EXPECT_THROW(bilinear_sample(t, 1, 0, 0, 0), IndexError);
  EXPECT_THROW(bilinear_sample(t, 0, 1, 0, 0), IndexError);
  EXPECT_THROW(bilinear_sample(t, 0, 0, std::nan(""), 0), ArgumentError);
  EXPECT_THROW(bilinear_sample(t, 0, 0, 0, std::numeric_limits<double>::infinity()), ArgumentError);
}

TEST(Conv2dReferenceTest, DeltaKernelIsIdentity) {
  std::mt19937_64 rng(1);
  const Tensor x = oracle::random_tensor(Shape{2, 3, 6, 5}, rng);
  const std::vector<float> delta3{0, 0, 0, 0, 1, 0, 0, 0, 0};
  for (std::size_t d : {1u, 2u, 3u}) {
    const Tensor y = conv2d_reference(x, delta3, 3, 3, d);
    EXPECT_TRUE(std::equal(y.data().begin(), y.data().end(), x.data().begin()));
  }
}

TEST(Conv2dReferenceTest, HandValues) {
  const std::vector<float> ones(9, 1.0f);
  const Tensor constant = Tensor::filled(Shape{1, 1, 5, 5}, 2.5f);
  EXPECT_FLOAT_EQ(conv2d_reference(constant, ones, 3, 3)(0, 0, 2, 2), 22.5f);
  const Tensor small(Shape{1, 1, 2, 2}, {1, 2, 3, 4});
  EXPECT_FLOAT_EQ(conv2d_reference(small, ones, 3, 3)(0, 0, 0, 0), 10.0f);
}

TEST(Conv2dReferenceTest, RejectsEvenKernels) {
  const Tensor x = ramp3x3();
  EXPECT_THROW(conv2d_reference(x, std::vector<float>(4, 1.0f), 2, 2), ArgumentError);
  EXPECT_THROW(conv2d_reference(x, std::vector<float>(3, 1.0f), 3, 3), ArgumentError);
}

TEST(TensorFileTest, RoundTripIsByteIdentical) {
  std::mt19937_64 rng(9);
  for (const Shape s : {Shape{1, 1, 1, 1}, Shape{2, 3, 4, 5}, Shape{1, 7, 3, 2}}) {
    Tensor t = oracle::random_tensor(s, rng, -1e6f, 1e6f);
    t.data()[0] = -0.0f;
    const auto path = temp_file("roundtrip.ptns");
    save_tensor(t, path);
    const Tensor back = load_tensor(path);
    EXPECT_EQ(back.shape(), s);
    EXPECT_EQ(encode_tensor(back), encode_tensor(t));
    std::ifstream in(path, std::ios::binary);
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(raw.size(), 44 + 4 * s.numel());
  }
}

TEST(TensorFileTest, LayoutIsLittleEndianPtns) {
  const auto bytes = encode_tensor(Tensor(Shape{1, 1, 1, 2}, {1.0f, -2.0f}));
  const std::vector<std::uint8_t> expected{'P', 'T', 'N', 'S', 1, 0, 0, 0, 4, 0, 0, 0,  //
                                           1, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0,
                                           1, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0,
                                           0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
  EXPECT_EQ(bytes, expected);
}

TEST(TensorFileTest, MalformedInputsReportOffsets) {
  const auto good = encode_tensor(ramp3x3());

  auto truncated = good;
  truncated.resize(good.size() - 3);
  EXPECT_THROW(decode_tensor(truncated), FormatError);
  EXPECT_THROW(decode_tensor(std::vector<std::uint8_t>(good.begin(), good.begin() + 20)), FormatError);

  auto magic = good;
  magic[0] = 'X';
  try {
    decode_tensor(magic);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0);
  }

  auto version = good;
  version[4] = 2;
  try {
    decode_tensor(version);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 4);
  }

  auto ndim = good;
  ndim[8] = 3;
  EXPECT_THROW(decode_tensor(ndim), FormatError);

  // Dims whose product exceeds 2^63.
  auto huge = good;
  for (int d = 0; d < 4; ++d)
    for (int b = 0; b < 8; ++b) huge[12 + 8 * d + b] = b == 2 ? 0x01 : 0x00;  // 2^16 each -> 2^64
  try {
    decode_tensor(huge);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 12 + 8 * 3);
  }

  auto nan = good;
  nan[44] = 0x00;
  nan[45] = 0x00;
  nan[46] = 0xc0;
  nan[47] = 0x7f;
  EXPECT_THROW(decode_tensor(nan), FormatError);

  EXPECT_THROW(load_tensor("/nonexistent/dir/x.ptns"), IoError);
}

}  // namespace
}  // namespace panops
