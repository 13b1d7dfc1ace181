// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "panops/salience.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "parallel.hpp"

namespace panops::salience {
namespace {

void check_kernel(std::size_t kernel) {
  if (kernel < 3 || kernel % 2 == 0)
    throw ArgumentError("salience kernel must be odd and >= 3, got " + std::to_string(kernel));
}

// Gathers per-pixel feature vectors and their squared norms for one batch item.
struct Features {
  std::size_t c, h, w;
  std::vector<double> values;  // (h, w, c)
  std::vector<double> sq_norm;

  Features(const Tensor& f, std::size_t n)
      : c(f.shape().c), h(f.shape().h), w(f.shape().w), values(c * h * w), sq_norm(h * w, 0.0) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const float* plane = f.plane(n, ch);
      for (std::size_t p = 0; p < h * w; ++p) values[p * c + ch] = plane[p];
    }
    for (std::size_t p = 0; p < h * w; ++p) sq_norm[p] = dot(p, p);
  }

  double dot(std::size_t a, std::size_t b) const {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) acc += values[a * c + ch] * values[b * c + ch];
    return acc;
  }

  double cosine(std::size_t a, std::size_t b) const {
    if (std::sqrt(sq_norm[a]) < kNormEpsilon || std::sqrt(sq_norm[b]) < kNormEpsilon) return 0.0;
    return dot(a, b) / std::sqrt(sq_norm[a] * sq_norm[b]);
  }

  // Row-major k x k window around (i, j), clamp-to-edge.
  void window(std::size_t i, std::size_t j, std::size_t kernel, std::vector<double>& sims) const {
    const auto r = static_cast<std::int64_t>(kernel / 2);
    const std::size_t centre = i * w + j;
    sims.clear();
    for (std::int64_t a = -r; a <= r; ++a)
      for (std::int64_t b = -r; b <= r; ++b) {
        const auto yy = static_cast<std::size_t>(
            std::clamp<std::int64_t>(static_cast<std::int64_t>(i) + a, 0, static_cast<std::int64_t>(h) - 1));
        const auto xx = static_cast<std::size_t>(
            std::clamp<std::int64_t>(static_cast<std::int64_t>(j) + b, 0, static_cast<std::int64_t>(w) - 1));
        sims.push_back(cosine(centre, yy * w + xx));
      }
  }
};

}  // namespace

double salience_upper_bound(std::size_t kernel) {
  const auto k = static_cast<double>(kernel * kernel);
  return std::sqrt(k - 1.0) / k;
}

double salience_from_similarities(const double* sims, std::size_t count) {
  if (count == 0) throw ArgumentError("salience: empty similarity vector");
  const double peak = *std::max_element(sims, sims + count);
  std::vector<double> prob(count);
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) total += prob[i] = std::exp(sims[i] - peak);
  // A probability vector has mean exactly 1/K.
  const double mean = 1.0 / static_cast<double>(count);
  double ss = 0.0;
  for (double p : prob) {
    const double d = p / total - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(count));
}

Tensor patch_cosine_similarity(const Tensor& f, std::size_t kernel) {
  check_kernel(kernel);
  const Shape& s = f.shape();
  const std::size_t taps = kernel * kernel;
  Tensor out(Shape{s.n, taps, s.h, s.w});
  for (std::size_t n = 0; n < s.n; ++n) {
    const Features feats(f, n);
    detail::parallel_for(s.h, [&](std::size_t i) {
      std::vector<double> sims;
      for (std::size_t j = 0; j < s.w; ++j) {
        feats.window(i, j, kernel, sims);
        for (std::size_t t = 0; t < taps; ++t) out(n, t, i, j) = static_cast<float>(sims[t]);
      }
    });
  }
  return out;
}

Tensor salient_map(const Tensor& f, std::size_t kernel) {
  check_kernel(kernel);
  const Shape& s = f.shape();
  Tensor out(Shape{s.n, 1, s.h, s.w});
  for (std::size_t n = 0; n < s.n; ++n) {
    const Features feats(f, n);
    detail::parallel_for(s.h, [&](std::size_t i) {
      std::vector<double> sims;
      for (std::size_t j = 0; j < s.w; ++j) {
        feats.window(i, j, kernel, sims);
        out(n, 0, i, j) = static_cast<float>(salience_from_similarities(sims.data(), sims.size()));
      }
    });
  }
  return out;
}

}  // namespace panops::salience
