// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "panops/threading.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace panops {
namespace {
std::atomic<std::size_t> g_threads{1};
}

void set_num_threads(std::size_t count) noexcept {
  if (count == 0) count = std::max(1u, std::thread::hardware_concurrency());
  g_threads.store(count, std::memory_order_relaxed);
}

std::size_t num_threads() noexcept { return g_threads.load(std::memory_order_relaxed); }

}  // namespace panops
