// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "panops/deform.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "panops/salience.hpp"
#include "panops/threading.hpp"

namespace panops::deform {
namespace {

DeformParams make_params(Tensor weights, std::size_t k = 3, std::size_t dil = 1, std::size_t groups = 1) {
  DeformParams p;
  p.kernel_h = p.kernel_w = k;
  p.dilation = dil;
  p.groups = groups;
  p.weights = std::move(weights);
  return p;
}

Tensor zero_offsets(Shape x, std::size_t taps, std::size_t groups = 1) {
  return Tensor(Shape{x.n, 2 * taps * groups, x.h, x.w});
}

Tensor ones_mod(Shape x, std::size_t taps, std::size_t groups = 1) {
  return Tensor::filled(Shape{x.n, taps * groups, x.h, x.w}, 1.0f);
}

TEST(DeformForwardTest, HandBilinearValue) {
  const Tensor x(Shape{1, 1, 3, 3}, {0, 1, 2, 3, 4, 5, 6, 7, 8});
  Tensor off(Shape{1, 2, 3, 3});
  off(0, 0, 1, 1) = 0.5f;
  off(0, 1, 1, 1) = 0.5f;
  const auto p = make_params(Tensor::filled(Shape{1, 1, 1, 1}, 1.0f), 1);
  EXPECT_FLOAT_EQ(dcn_forward(x, p, off)(0, 0, 1, 1), 6.0f);
}

TEST(DeformForwardTest, DeltaWeightsWithZeroOffsetsAreIdentity) {
  std::mt19937_64 rng(2);
  const Tensor x = oracle::random_tensor(Shape{2, 3, 6, 5}, rng);
  Tensor w(Shape{3, 3, 3, 3});
  for (std::size_t c = 0; c < 3; ++c) w(c, c, 1, 1) = 1.0f;
  const Tensor y = dcn_forward(x, make_params(w), zero_offsets(x.shape(), 9));
  EXPECT_EQ(oracle::max_abs_diff(y, x), 0.0);
}

TEST(DeformForwardTest, ReductionChainToReferenceConvolution) {
  std::mt19937_64 rng(17);
  for (int seed = 0; seed < 20; ++seed) {
    const std::size_t c = 1 + seed % 4, h = 4 + seed % 13, w = 5 + (seed * 7) % 12, dil = 1 + seed % 2;
    const Shape s{1 + std::size_t(seed % 2), c, h, w};
    const Tensor x = oracle::random_tensor(s, rng);
    const Tensor wt = oracle::random_tensor(Shape{3, c, 3, 3}, rng);
    const auto p = make_params(wt, 3, dil);
    const Tensor off = zero_offsets(s, 9);
    const Tensor y1 = dcn_forward(x, p, off);
    const TensorD ref = oracle::conv_by_reference(x, wt, dil);
    EXPECT_LT(oracle::max_abs_diff(y1, ref), 1e-5) << "seed " << seed;
    EXPECT_EQ(oracle::max_abs_diff(dcnv2_forward(x, p, off, ones_mod(s, 9)), y1), 0.0);

    // v3 with one group: uniform-tap convolution with the 1x1 channel mix.
    const Tensor w3 = oracle::random_tensor(Shape{c, c, 1, 1}, rng);
    Tensor uniform(Shape{c, c, 3, 3});
    for (std::size_t o = 0; o < c; ++o)
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t t = 0; t < 9; ++t) uniform.data()[(o * c + i) * 9 + t] = w3(o, i, 0, 0);
    const Tensor y3 = dcnv3_forward(x, make_params(w3, 3, dil), off, ones_mod(s, 9));
    EXPECT_LT(oracle::max_abs_diff(y3, oracle::conv_by_reference(x, uniform, dil)), 1e-5);
  }
}

TEST(DeformForwardTest, ModulationScaling) {
  const auto in = make_random_case(Variant::kV2, RandomCaseSpec{}, 4);
  const Shape ms = in.modulation->shape();
  const Tensor base = dcn_forward(in.x, in.params, in.offsets);
  EXPECT_EQ(oracle::max_abs_diff(dcnv2_forward(in.x, in.params, in.offsets, Tensor(ms)), Tensor(base.shape())), 0.0);
  const Tensor half = dcnv2_forward(in.x, in.params, in.offsets, Tensor::filled(ms, 0.5f));
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(half.data()[i], 0.5 * base.data()[i], 1e-6);
}

TEST(DeformForwardTest, LinearInInput) {
  for (Variant v : {Variant::kV1, Variant::kV2, Variant::kV3}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto in = make_random_case(v, RandomCaseSpec{.input = {1, 4, 6, 6}, .groups = v == Variant::kV3 ? 2u : 1u}, seed);
      std::mt19937_64 rng(seed + 100);
      const Tensor a = oracle::random_tensor(in.x.shape(), rng);
      const Tensor b = oracle::random_tensor(in.x.shape(), rng);
      const float alpha = 1.5f, beta = -0.25f;
      Tensor mix(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) mix.data()[i] = alpha * a.data()[i] + beta * b.data()[i];
      auto run = [&](const Tensor& x) {
        in.x = x;
        return forward(v, in);
      };
      const Tensor fa = run(a), fb = run(b), fm = run(mix);
      for (std::size_t i = 0; i < fm.size(); ++i)
        EXPECT_NEAR(fm.data()[i], alpha * fa.data()[i] + beta * fb.data()[i], 1e-5);
    }
  }
}

TEST(DeformForwardTest, GroupDecomposition) {
  std::mt19937_64 rng(8);
  const Shape s{1, 4, 5, 6};
  const Tensor x = oracle::random_tensor(s, rng);
  const Tensor wg = oracle::random_tensor(Shape{2, 2, 1, 1}, rng);
  const Tensor off1 = oracle::random_tensor(Shape{1, 18, 5, 6}, rng, -1.5f, 1.5f);
  const Tensor mod1 = oracle::random_tensor(Shape{1, 9, 5, 6}, rng);

  // Both groups share the same weights, offsets and modulation.
  Tensor w2(Shape{4, 2, 1, 1});
  for (std::size_t o = 0; o < 4; ++o)
    for (std::size_t i = 0; i < 2; ++i) w2(o, i, 0, 0) = wg(o % 2, i, 0, 0);
  Tensor off2(Shape{1, 36, 5, 6}), mod2(Shape{1, 18, 5, 6});
  for (std::size_t g = 0; g < 2; ++g) {
    std::copy(off1.data().begin(), off1.data().end(), off2.data().begin() + g * off1.size());
    std::copy(mod1.data().begin(), mod1.data().end(), mod2.data().begin() + g * mod1.size());
  }
  const Tensor y = dcnv3_forward(x, make_params(w2, 3, 1, 2), off2, mod2);
  for (std::size_t g = 0; g < 2; ++g) {
    Tensor half(Shape{1, 2, 5, 6});
    for (std::size_t c = 0; c < 2; ++c)
      std::copy_n(x.plane(0, 2 * g + c), 30, half.plane(0, c));
    const Tensor yg = dcnv3_forward(half, make_params(wg), off1, mod1);
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < 30; ++i) EXPECT_FLOAT_EQ(y.plane(0, 2 * g + c)[i], yg.plane(0, c)[i]);
  }
}

TEST(DeformForwardTest, MatchesBruteForceOracle) {
  for (Variant v : {Variant::kV1, Variant::kV2, Variant::kV3}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto in = make_random_case(
          v, RandomCaseSpec{.input = {1, 2, 4, 4}, .dilation = 1 + seed % 2, .groups = v == Variant::kV3 ? 2u : 1u},
          seed);
      const auto kind = static_cast<oracle::Kind>(static_cast<int>(v));
      const TensorD ref = oracle::deform(kind, in.x, in.params.weights, in.offsets,
                                         in.modulation ? &*in.modulation : nullptr, 3, 3, in.params.dilation,
                                         in.params.groups);
      EXPECT_LT(oracle::max_abs_diff(forward(v, in), ref), 1e-5);
    }
  }
}

TEST(DeformForwardTest, Dcnv4IsDcnv3) {
  const auto in = make_random_case(Variant::kV3, RandomCaseSpec{.input = {1, 4, 5, 5}, .groups = 2}, 3);
  const Tensor a = dcnv3_forward(in.x, in.params, in.offsets, *in.modulation);
  const Tensor b = dcnv4_forward(in.x, in.params, in.offsets, *in.modulation);
  EXPECT_EQ(encode_tensor(a), encode_tensor(b));
}

TEST(DeformForwardTest, ThreadCountDoesNotChangeResults) {
  const auto in = make_random_case(Variant::kV3, RandomCaseSpec{.input = {2, 4, 16, 16}, .groups = 2}, 12);
  set_num_threads(1);
  const auto serial = encode_tensor(forward(Variant::kV3, in));
  set_num_threads(4);
  const auto parallel = encode_tensor(forward(Variant::kV3, in));
  set_num_threads(1);
  EXPECT_EQ(serial, parallel);
}

TEST(DeformForwardTest, ShapeErrors) {
  const auto in = make_random_case(Variant::kV2, RandomCaseSpec{}, 1);
  EXPECT_THROW(dcn_forward(in.x, in.params, Tensor(Shape{1, 16, 4, 4})), ArgumentError);
  EXPECT_THROW(dcnv2_forward(in.x, in.params, in.offsets, Tensor(Shape{1, 8, 4, 4})), ArgumentError);
  EXPECT_THROW(dcn_forward(in.x, make_params(Tensor(Shape{2, 3, 3, 3})), in.offsets), ArgumentError);
  DeformInputs v1 = in;
  EXPECT_THROW(forward(Variant::kV1, v1), ArgumentError);  // modulation supplied to v1
  v1.modulation.reset();
  EXPECT_THROW(forward(Variant::kV2, v1), ArgumentError);
  const Tensor x3(Shape{1, 3, 4, 4});
  EXPECT_THROW(dcnv3_forward(x3, make_params(Tensor(Shape{3, 1, 1, 1}), 3, 1, 2), zero_offsets(x3.shape(), 9, 2),
                             ones_mod(x3.shape(), 9, 2)),
               ArgumentError);
  try {
    dcn_forward(in.x, in.params, Tensor(Shape{1, 16, 4, 4}));
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("(1, 18, 4, 4)"), std::string::npos) << e.what();
  }
}

TEST(DaoTest, DecompositionIsExact) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto in = make_random_case(Variant::kV3, RandomCaseSpec{.input = {1, 4, 6, 7}, .groups = 2}, seed);
    const auto r = dao_forward(in.x, in.params, in.offsets, *in.modulation, 3);
    const Tensor y3 = dcnv3_forward(in.x, in.params, in.offsets, *in.modulation);
    EXPECT_EQ(encode_tensor(r.dcnv3), encode_tensor(y3));
    EXPECT_EQ(encode_tensor(r.salient), encode_tensor(salience::salient_map(y3, 3)));
    for (std::size_t c = 0; c < 4; ++c)
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(r.y(0, c, i, j), r.salient(0, 0, i, j) * y3(0, c, i, j));
  }
}

TEST(DaoTest, ConstantInputGivesZeroSalience) {
  const Shape s{1, 1, 7, 7};
  const Tensor x = Tensor::filled(s, 0.75f);
  const auto r = dao_forward(x, make_params(Tensor::filled(Shape{1, 1, 1, 1}, 0.5f)), zero_offsets(s, 9),
                             ones_mod(s, 9));
  for (float v : r.salient.data()) EXPECT_EQ(v, 0.0f);
  // Multichannel: interior pixels see an exactly uniform neighbourhood.
  const Shape s4{1, 4, 8, 8};
  std::mt19937_64 rng(6);
  const auto r4 = dao_forward(Tensor::filled(s4, 2.0f), make_params(oracle::random_tensor(Shape{4, 4, 1, 1}, rng, 0.1f, 1.0f)),
                              zero_offsets(s4, 9), ones_mod(s4, 9));
  for (std::size_t i = 2; i < 6; ++i)
    for (std::size_t j = 2; j < 6; ++j) EXPECT_EQ(r4.salient(0, 0, i, j), 0.0f);
}

TEST(DaoTest, MatchesComposedOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto in = make_random_case(Variant::kV3, RandomCaseSpec{.input = {1, 2, 5, 5}}, seed);
    const auto r = dao_forward(in.x, in.params, in.offsets, *in.modulation, 3);
    const TensorD y3 = oracle::deform(oracle::Kind::kV3, in.x, in.params.weights, in.offsets, &*in.modulation, 3, 3, 1, 1);
    const TensorD s = oracle::salience(y3.cast<float>(), 3);
    TensorD expected(y3.shape());
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) expected(0, c, i, j) = s(0, 0, i, j) * y3(0, c, i, j);
    EXPECT_LT(oracle::max_abs_diff(r.y, expected), 1e-5);
    EXPECT_LT(oracle::max_abs_diff(r.salient, s), 1e-5);
  }
}

TEST(GradientTest, MatchesFiniteDifferencesOnRandomCases) {
  for (Variant v : {Variant::kV1, Variant::kV2, Variant::kV3}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      RandomCaseSpec spec;
      if (v == Variant::kV3 && seed % 2 == 1) spec = {.input = {1, 4, 4, 4}, .groups = 2};
      const auto in = make_random_case(v, spec, seed);
      const auto report = gradcheck(v, in, 1e-3);
      EXPECT_LT(report.max(), 1e-3) << "variant " << int(v) << " seed " << seed;
    }
  }
}

TEST(GradientTest, WeightGradientIsInputCorrelation) {
  std::mt19937_64 rng(21);
  const Shape s{1, 2, 5, 4};
  const Tensor x = oracle::random_tensor(s, rng);
  const Tensor up = oracle::random_tensor(Shape{1, 3, 5, 4}, rng);
  DeformInputs in{x, make_params(oracle::random_tensor(Shape{3, 2, 3, 3}, rng)), zero_offsets(s, 9), ones_mod(s, 9)};
  const auto g = deform_backward(Variant::kV2, in, up);
  for (std::size_t o = 0; o < 3; ++o)
    for (std::size_t ci = 0; ci < 2; ++ci)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          double acc = 0.0;
          for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 4; ++j) {
              const int yy = i + a - 1, xx = j + b - 1;
              if (yy < 0 || yy >= 5 || xx < 0 || xx >= 4) continue;
              acc += double(x(0, ci, yy, xx)) * up(0, o, i, j);
            }
          EXPECT_NEAR(g.weights(o, ci, a, b), acc, 1e-6);
        }
}

TEST(GradientTest, ModulationGradientIsSampledProduct) {
  const auto in = make_random_case(Variant::kV2, RandomCaseSpec{.input = {1, 2, 5, 5}}, 13);
  std::mt19937_64 rng(1);
  const Tensor up = oracle::random_tensor(Shape{1, 2, 5, 5}, rng);
  const auto g = deform_backward(Variant::kV2, in, up);
  const auto base = in.params.base_offsets();
  for (std::size_t k = 0; k < 9; ++k)
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) {
        const double py = double(i) + base[k].dy + in.offsets(0, 2 * k, i, j);
        const double px = double(j) + base[k].dx + in.offsets(0, 2 * k + 1, i, j);
        double acc = 0.0;
        for (std::size_t o = 0; o < 2; ++o)
          for (std::size_t ci = 0; ci < 2; ++ci)
            acc += double(in.params.weights(o, ci, k / 3, k % 3)) * oracle::tent_sample(in.x, 0, ci, py, px) * up(0, o, i, j);
        EXPECT_NEAR((*g.modulation)(0, k, i, j), acc, 1e-6);
      }
}

TEST(GradientTest, LinearParametersAreExactUnderFiniteDifferences) {
  for (Variant v : {Variant::kV1, Variant::kV2, Variant::kV3}) {
    const auto in = make_random_case(v, RandomCaseSpec{}, 77);
    const auto g = deform_backward(v, in, Tensor::filled(forward(v, in).shape(), 1.0f));
    EXPECT_LT(oracle::max_abs_diff(g.weights, fd_gradient(v, in, Param::kWeights, 1e-3)), 1e-8);
    EXPECT_LT(oracle::max_abs_diff(g.x, fd_gradient(v, in, Param::kInput, 1e-3)), 1e-8);
    if (v != Variant::kV1)
      EXPECT_LT(oracle::max_abs_diff(*g.modulation, fd_gradient(v, in, Param::kModulation, 1e-3)), 1e-8);
  }
}

TEST(GradientTest, StepHalvingDoesNotIncreaseOffsetError) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // Margins wide enough that both steps stay inside one bilinear cell.
    const auto in = make_random_case(Variant::kV2, RandomCaseSpec{.breakpoint_margin = 2.5e-2}, seed);
    const auto g = deform_backward(Variant::kV2, in, Tensor::filled(forward(Variant::kV2, in).shape(), 1.0f));
    const double coarse = max_relative_error(g.offsets, fd_gradient(Variant::kV2, in, Param::kOffsets, 1e-2));
    const double fine = max_relative_error(g.offsets, fd_gradient(Variant::kV2, in, Param::kOffsets, 1e-3));
    EXPECT_LE(fine, coarse + 1e-8);
  }
  // A sample 0.005 from a breakpoint: the coarse step straddles it, the fine one does not.
  const Tensor x(Shape{1, 1, 1, 3}, {0.0f, 2.0f, -1.0f});
  Tensor off(Shape{1, 2, 1, 3});
  off(0, 1, 0, 0) = 0.995f;
  DeformInputs in{x, make_params(Tensor::filled(Shape{1, 1, 1, 1}, 1.0f), 1), off, std::nullopt};
  const auto g = deform_backward(Variant::kV1, in, Tensor::filled(Shape{1, 1, 1, 3}, 1.0f));
  const double analytic = g.offsets(0, 1, 0, 0);
  EXPECT_DOUBLE_EQ(analytic, 2.0);
  const double coarse = fd_gradient(Variant::kV1, in, Param::kOffsets, 1e-2)(0, 1, 0, 0);
  const double fine = fd_gradient(Variant::kV1, in, Param::kOffsets, 1e-3)(0, 1, 0, 0);
  EXPECT_GT(std::abs(coarse - analytic), 1e-2);
  EXPECT_NEAR(fine, analytic, 1e-6);
}

TEST(GradientTest, RightLimitAtIntegerCoordinates) {
  const Tensor x(Shape{1, 1, 1, 3}, {0.0f, 2.0f, -1.0f});
  DeformInputs in{x, make_params(Tensor::filled(Shape{1, 1, 1, 1}, 1.0f), 1), Tensor(Shape{1, 2, 1, 3}), std::nullopt};
  const auto g = deform_backward(Variant::kV1, in, Tensor::filled(Shape{1, 1, 1, 3}, 1.0f));
  EXPECT_DOUBLE_EQ(g.offsets(0, 1, 0, 0), 2.0);   // x[1] - x[0]
  EXPECT_DOUBLE_EQ(g.offsets(0, 1, 0, 1), -3.0);  // x[2] - x[1]
  EXPECT_DOUBLE_EQ(g.offsets(0, 1, 0, 2), 1.0);   // 0 - x[2]
}

TEST(GradientTest, Errors) {
  const auto in = make_random_case(Variant::kV2, RandomCaseSpec{}, 0);
  EXPECT_THROW(fd_gradient(Variant::kV2, in, Param::kWeights, 0.0), ArgumentError);
  EXPECT_THROW(fd_gradient(Variant::kV2, in, Param::kWeights, -1e-3), ArgumentError);
  EXPECT_THROW(deform_backward(Variant::kV2, in, Tensor(Shape{1, 2, 4, 5})), ArgumentError);
  DeformInputs v1 = in;
  v1.modulation.reset();
  EXPECT_THROW(fd_gradient(Variant::kV1, v1, Param::kModulation, 1e-3), ArgumentError);
}

TEST(GradientTest, RandomCasesAvoidBreakpoints) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto in = make_random_case(Variant::kV3, RandomCaseSpec{}, seed);
    for (float v : in.offsets.data()) {
      const double frac = v - std::floor(double(v));
      EXPECT_GE(std::min(frac, 1.0 - frac), 2e-3 - 1e-7);
      EXPECT_LE(std::abs(v), 1.5f);
    }
  }
  const auto a = make_random_case(Variant::kV2, RandomCaseSpec{}, 5);
  const auto b = make_random_case(Variant::kV2, RandomCaseSpec{}, 5);
  EXPECT_EQ(encode_tensor(a.offsets), encode_tensor(b.offsets));
  EXPECT_EQ(encode_tensor(a.x), encode_tensor(b.x));
}

TEST(TraceTest, TwoLevelsGive81Points) {
  const Shape s{1, 1, 9, 9};
  std::mt19937_64 rng(4);
  DeformParams p = make_params(Tensor{});
  const std::vector<TraceLevel> levels{{p, oracle::random_tensor(Shape{1, 18, 9, 9}, rng, -2, 2)},
                                       {p, oracle::random_tensor(Shape{1, 18, 9, 9}, rng, -2, 2)}};
  EXPECT_EQ(trace_receptive_field(levels, {4, 4}).size(), 81u);
  const std::vector<TraceLevel> three{levels[0], levels[1], levels[0]};
  EXPECT_EQ(trace_receptive_field(three, {4, 4}).size(), 729u);
  (void)s;
}

TEST(TraceTest, ZeroOffsetsGiveDilatedLattice) {
  for (std::size_t d : {1u, 2u, 3u}) {
    DeformParams p = make_params(Tensor{}, 3, d);
    const auto pts = trace_receptive_field({{p, Tensor(Shape{1, 18, 12, 12})}}, {6, 5});
    ASSERT_EQ(pts.size(), 9u);
    for (std::size_t k = 0; k < 9; ++k) {
      EXPECT_EQ(pts[k].y, 6.0 + (double(k / 3) - 1) * double(d));
      EXPECT_EQ(pts[k].x, 5.0 + (double(k % 3) - 1) * double(d));
    }
  }
}

TEST(TraceTest, TwoZeroLevelsGiveStencilMultiplicities) {
  DeformParams p = make_params(Tensor{});
  const Tensor off(Shape{1, 18, 9, 9});
  const auto pts = trace_receptive_field({{p, off}, {p, off}}, {4, 4});
  std::map<std::pair<int, int>, int> counts;
  for (const auto& q : pts) ++counts[{int(q.y) - 4, int(q.x) - 4}];
  EXPECT_EQ(counts.size(), 25u);
  for (const auto& [d, n] : counts) EXPECT_EQ(n, (3 - std::abs(d.first)) * (3 - std::abs(d.second)));
}

TEST(TraceTest, Errors) {
  DeformParams p = make_params(Tensor{});
  EXPECT_THROW(trace_receptive_field({}, {0, 0}), ArgumentError);
  EXPECT_THROW(trace_receptive_field({{p, Tensor(Shape{1, 18, 4, 4})}}, {4, 0}), ArgumentError);
  EXPECT_THROW(trace_receptive_field({{p, Tensor(Shape{1, 18, 4, 4})}}, {-0.5, 0}), ArgumentError);
  EXPECT_THROW(trace_receptive_field({{p, Tensor(Shape{1, 16, 4, 4})}}, {1, 1}), ArgumentError);
}

}  // namespace
}  // namespace panops::deform
