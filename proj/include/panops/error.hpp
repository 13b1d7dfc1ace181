// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace panops {

/// Precondition violated by an argument (bad shape, bad kernel size, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed file payload. `offset()` is the byte position where parsing
/// stopped, or -1 when the error is not tied to a position.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what, std::int64_t offset = -1)
      : std::runtime_error(offset >= 0
                               ? what + " (at byte " + std::to_string(offset) + ")"
                               : what),
        offset_(offset) {}

  std::int64_t offset() const noexcept { return offset_; }

 private:
  std::int64_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the IoU reductions when every category has an empty union.
class NoCategoriesError : public std::runtime_error {
 public:
  NoCategoriesError() : std::runtime_error("no categories present") {}
};

}  // namespace panops
