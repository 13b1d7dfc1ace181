// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "panops/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace panops {

static_assert(std::numeric_limits<float>::is_iec559, "PTNS stores IEEE-754 binary32");

std::string Shape::str() const {
  return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " + std::to_string(h) + ", " +
         std::to_string(w) + ")";
}

double bilinear_sample(const Tensor& t, std::size_t n, std::size_t c, double y, double x,
                       BorderPolicy border) {
  const Shape& s = t.shape();
  if (n >= s.n || c >= s.c)
    throw IndexError("bilinear_sample: plane (" + std::to_string(n) + ", " + std::to_string(c) +
                     ") out of range for shape " + s.str());
  if (!std::isfinite(y) || !std::isfinite(x))
    throw ArgumentError("bilinear_sample: coordinates must be finite");

  const float* plane = t.plane(n, c);
  const auto h = static_cast<std::int64_t>(s.h);
  const auto w = static_cast<std::int64_t>(s.w);
  const double yf = std::floor(y);
  const double xf = std::floor(x);
  const double ly = y - yf;
  const double lx = x - xf;
  // Far outside the grid every neighbour is resolved by the policy alone.
  const double limit = static_cast<double>(std::max(h, w)) + 2.0;
  const auto y0 = static_cast<std::int64_t>(std::clamp(yf, -limit, limit));
  const auto x0 = static_cast<std::int64_t>(std::clamp(xf, -limit, limit));

  auto fetch = [&](std::int64_t yy, std::int64_t xx) -> double {
    if (border == BorderPolicy::kClampToEdge) {
      yy = std::clamp<std::int64_t>(yy, 0, h - 1);
      xx = std::clamp<std::int64_t>(xx, 0, w - 1);
    } else if (yy < 0 || yy >= h || xx < 0 || xx >= w) {
      return 0.0;
    }
    return plane[yy * w + xx];
  };

  return (1 - ly) * (1 - lx) * fetch(y0, x0) + (1 - ly) * lx * fetch(y0, x0 + 1) +
         ly * (1 - lx) * fetch(y0 + 1, x0) + ly * lx * fetch(y0 + 1, x0 + 1);
}

Tensor conv2d_reference(const Tensor& x, std::span<const float> kernel, std::size_t kh,
                        std::size_t kw, std::size_t dilation) {
  if (kh % 2 == 0 || kw % 2 == 0)
    throw ArgumentError("conv2d_reference: kernel extents must be odd");
  if (kernel.size() != kh * kw)
    throw ArgumentError("conv2d_reference: kernel has " + std::to_string(kernel.size()) +
                        " taps, expected " + std::to_string(kh * kw));
  if (dilation == 0) throw ArgumentError("conv2d_reference: dilation must be positive");

  const Shape& s = x.shape();
  Tensor out(s);
  const auto h = static_cast<std::int64_t>(s.h);
  const auto w = static_cast<std::int64_t>(s.w);
  const auto ry = static_cast<std::int64_t>(kh / 2);
  const auto rx = static_cast<std::int64_t>(kw / 2);
  const auto d = static_cast<std::int64_t>(dilation);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::int64_t i = 0; i < h; ++i)
        for (std::int64_t j = 0; j < w; ++j) {
          double acc = 0.0;
          for (std::int64_t a = -ry; a <= ry; ++a)
            for (std::int64_t b = -rx; b <= rx; ++b) {
              const std::int64_t yy = i + a * d;
              const std::int64_t xx = j + b * d;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              acc += static_cast<double>(kernel[(a + ry) * kw + (b + rx)]) *
                     x(n, c, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
            }
          out(n, c, static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
              static_cast<float>(acc);
        }
  return out;
}

namespace {

constexpr char kMagic[4] = {'P', 'T', 'N', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 * 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 4 * t.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kVersion);
  put_u32(out, 4);
  const Shape& s = t.shape();
  for (std::uint64_t d : {s.n, s.c, s.h, s.w}) put_u64(out, d);
  for (float v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("PTNS: truncated magic", static_cast<std::int64_t>(bytes.size()));
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("PTNS: bad magic", 0);
  if (bytes.size() < 12) throw FormatError("PTNS: truncated header", static_cast<std::int64_t>(bytes.size()));
  if (const auto version = get_le(bytes, 4, 4); version != kVersion)
    throw FormatError("PTNS: unsupported version " + std::to_string(version), 4);
  if (const auto ndim = get_le(bytes, 8, 4); ndim != 4)
    throw FormatError("PTNS: expected ndim 4, got " + std::to_string(ndim), 8);
  if (bytes.size() < kHeaderBytes)
    throw FormatError("PTNS: truncated dims", static_cast<std::int64_t>(bytes.size()));

  std::uint64_t dims[4];
  std::uint64_t count = 1;
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 63;
  for (int i = 0; i < 4; ++i) {
    const std::size_t at = 12 + 8 * static_cast<std::size_t>(i);
    dims[i] = get_le(bytes, at, 8);
    if (dims[i] == 0) throw FormatError("PTNS: zero dimension", static_cast<std::int64_t>(at));
    if (count > (kLimit - 1) / dims[i])
      throw FormatError("PTNS: element count overflows 2^63", static_cast<std::int64_t>(at));
    count *= dims[i];
  }
  const std::uint64_t payload = bytes.size() - kHeaderBytes;
  if (count > payload / 4 || payload != count * 4)
    throw FormatError("PTNS: payload is " + std::to_string(payload) + " bytes, expected " +
                          std::to_string(count) + " floats",
                      static_cast<std::int64_t>(count > payload / 4 ? bytes.size()
                                                                     : kHeaderBytes + count * 4));

  std::vector<float> data(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto bits = static_cast<std::uint32_t>(get_le(bytes, kHeaderBytes + 4 * i, 4));
    data[i] = std::bit_cast<float>(bits);
    if (!std::isfinite(data[i]))
      throw FormatError("PTNS: non-finite value", static_cast<std::int64_t>(kHeaderBytes + 4 * i));
  }
  return Tensor(Shape{dims[0], dims[1], dims[2], dims[3]}, std::move(data));
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

}  // namespace panops
