// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace panops::detail {

/// Uniform double in [lo, hi) from the top 53 bits of one engine draw. Unlike
/// std::uniform_real_distribution the mapping is fixed, so seeded streams
/// match across standard libraries.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

}  // namespace panops::detail
