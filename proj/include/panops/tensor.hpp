// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "panops/error.hpp"

namespace panops {

/// (batch, channels, rows, cols). All extents are at least one.
struct Shape {
  std::size_t n = 1;
  std::size_t c = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t numel() const noexcept { return n * c * h * w; }
  std::size_t plane() const noexcept { return h * w; }
  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense row-major NCHW array. Construction rejects empty extents and
/// non-finite values; mutable access is unchecked.
template <typename T>
class BasicTensor {
  static_assert(std::is_floating_point_v<T>);

 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape) : shape_(checked(shape)), data_(shape.numel(), T{0}) {}

  BasicTensor(Shape shape, std::vector<T> data) : shape_(checked(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.numel())
      throw ArgumentError("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape " + shape_.str());
    for (T v : data_)
      if (!std::isfinite(v)) throw ArgumentError("tensor values must be finite");
  }

  static BasicTensor filled(Shape shape, T value) {
    return BasicTensor(shape, std::vector<T>(shape.numel(), value));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }

  std::size_t index(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  T operator()(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return data_[index(n, c, y, x)];
  }
  T& operator()(std::size_t n, std::size_t c, std::size_t y, std::size_t x) noexcept {
    return data_[index(n, c, y, x)];
  }

  /// Bounds-checked element access.
  T at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    if (n >= shape_.n || c >= shape_.c || y >= shape_.h || x >= shape_.w)
      throw IndexError("tensor index out of range for shape " + shape_.str());
    return data_[index(n, c, y, x)];
  }

  /// Pointer to the (n, c) plane.
  const T* plane(std::size_t n, std::size_t c) const noexcept {
    return data_.data() + (n * shape_.c + c) * shape_.plane();
  }
  T* plane(std::size_t n, std::size_t c) noexcept {
    return data_.data() + (n * shape_.c + c) * shape_.plane();
  }

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return BasicTensor<U>(shape_, std::move(out));
  }

 private:
  static Shape checked(Shape s) {
    if (s.n == 0 || s.c == 0 || s.h == 0 || s.w == 0)
      throw ArgumentError("tensor dimensions must be >= 1, got " + s.str());
    return s;
  }

  Shape shape_{};
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

enum class BorderPolicy { kZeroFill, kClampToEdge };

/// Bilinear interpolation of the (n, c) plane at fractional (y, x).
/// Neighbors that fall off the grid are resolved by `border`.
double bilinear_sample(const Tensor& t, std::size_t n, std::size_t c, double y, double x,
                       BorderPolicy border = BorderPolicy::kZeroFill);

/// Same-size dilated cross-correlation of every channel with one kh x kw
/// kernel (row-major taps), zero padding. Brute force; used as an oracle.
Tensor conv2d_reference(const Tensor& x, std::span<const float> kernel, std::size_t kh,
                        std::size_t kw, std::size_t dilation = 1);

/// PTNS container: "PTNS", u32 version=1, u32 ndim=4, 4 x u64 dims, f32 data.
/// All integers and floats little-endian.
void save_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor load_tensor(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

}  // namespace panops
