// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "panops/tensor.hpp"

namespace panops::salience {

/// Zero-norm guard for cosine similarity.
inline constexpr double kNormEpsilon = 1e-12;

/// (n, k*k, h, w): cosine similarity between the C-dim feature at each pixel
/// and each neighbour of its k x k window (row-major, clamp-to-edge).
Tensor patch_cosine_similarity(const Tensor& f, std::size_t kernel = 3);

/// (n, 1, h, w): population standard deviation of the softmax of the window
/// similarities. Bounded by sqrt(K-1)/K for K = k*k.
Tensor salient_map(const Tensor& f, std::size_t kernel = 3);

/// sqrt(K-1)/K, the standard deviation of a one-hot K-vector.
double salience_upper_bound(std::size_t kernel);

/// Salience of one similarity vector; exposed for tests and tooling.
double salience_from_similarities(const double* sims, std::size_t count);

}  // namespace panops::salience
