// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace panops {

/// Caps internal parallelism. 0 selects all hardware threads.
void set_num_threads(std::size_t count) noexcept;
std::size_t num_threads() noexcept;

}  // namespace panops
