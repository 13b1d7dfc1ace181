// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "panops/deform.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "panops/salience.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace panops::deform {

std::vector<Offset2> DeformParams::base_offsets() const {
  std::vector<Offset2> out;
  out.reserve(taps());
  const auto ry = static_cast<std::int64_t>(kernel_h / 2);
  const auto rx = static_cast<std::int64_t>(kernel_w / 2);
  const auto d = static_cast<double>(dilation);
  for (std::int64_t a = -ry; a <= ry; ++a)
    for (std::int64_t b = -rx; b <= rx; ++b)
      out.push_back({static_cast<double>(a) * d, static_cast<double>(b) * d});
  return out;
}

namespace {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kV1: return "dcn";
    case Variant::kV2: return "dcnv2";
    case Variant::kV3: return "dcnv3";
  }
  return "?";
}

struct Geometry {
  Variant variant = Variant::kV1;
  std::size_t n = 0, cin = 0, cout = 0, h = 0, w = 0;
  std::size_t taps = 0;
  std::size_t groups = 1;
  std::size_t group_channels = 0;  // input channels per group
  std::vector<Offset2> base;

  bool modulated() const { return variant != Variant::kV1; }
  std::size_t plane() const { return h * w; }
  std::size_t group_of(std::size_t ci) const { return variant == Variant::kV3 ? ci / group_channels : 0; }
};

void expect_shape(const Tensor& t, const Shape& want, const char* what, Variant v) {
  if (t.shape() != want)
    throw ArgumentError(std::string(variant_name(v)) + ": " + what + " has shape " +
                        t.shape().str() + ", expected " + want.str());
}

Geometry validate(Variant variant, const DeformInputs& in) {
  const DeformParams& p = in.params;
  if (p.kernel_h % 2 == 0 || p.kernel_w % 2 == 0 || p.kernel_h == 0 || p.kernel_w == 0)
    throw ArgumentError("kernel extents must be odd");
  if (p.dilation == 0) throw ArgumentError("dilation must be positive");
  if (p.groups == 0) throw ArgumentError("groups must be positive");
  if (in.x.empty()) throw ArgumentError("input tensor is empty");

  Geometry g;
  g.variant = variant;
  const Shape& xs = in.x.shape();
  g.n = xs.n;
  g.cin = xs.c;
  g.h = xs.h;
  g.w = xs.w;
  g.taps = p.taps();
  g.base = p.base_offsets();

  if (variant == Variant::kV3) {
    if (g.cin % p.groups != 0)
      throw ArgumentError("dcnv3: channels " + std::to_string(g.cin) + " not divisible by groups " +
                          std::to_string(p.groups));
    g.groups = p.groups;
    g.group_channels = g.cin / g.groups;
    g.cout = g.cin;
    expect_shape(p.weights, Shape{g.cin, g.group_channels, 1, 1}, "weights", variant);
  } else {
    if (p.groups != 1) throw ArgumentError(std::string(variant_name(variant)) + ": groups must be 1");
    if (p.weights.empty() || p.weights.shape().c != g.cin || p.weights.shape().h != p.kernel_h ||
        p.weights.shape().w != p.kernel_w)
      throw ArgumentError(std::string(variant_name(variant)) + ": weights have shape " +
                          p.weights.shape().str() + ", expected (C_out, " + std::to_string(g.cin) +
                          ", " + std::to_string(p.kernel_h) + ", " + std::to_string(p.kernel_w) + ")");
    g.cout = p.weights.shape().n;
    g.group_channels = g.cin;
  }

  expect_shape(in.offsets, Shape{g.n, 2 * g.taps * g.groups, g.h, g.w}, "offsets", variant);
  if (g.modulated()) {
    if (!in.modulation) throw ArgumentError(std::string(variant_name(variant)) + ": modulation required");
    expect_shape(*in.modulation, Shape{g.n, g.taps * g.groups, g.h, g.w}, "modulation", variant);
  } else if (in.modulation) {
    throw ArgumentError("dcn: variant v1 takes no modulation");
  }
  return g;
}

template <typename T>
std::vector<double> widen(std::span<const T> v) {
  return std::vector<double>(v.begin(), v.end());
}

// Double-precision copy of a problem; every kernel below works on this.
struct Problem {
  Geometry geo;
  std::vector<double> x, weights, offsets, modulation;

  Problem(Variant variant, const DeformInputs& in)
      : geo(validate(variant, in)),
        x(widen(in.x.data())),
        weights(widen(in.params.weights.data())),
        offsets(widen(in.offsets.data())),
        modulation(in.modulation ? widen(in.modulation->data()) : std::vector<double>{}) {}

  std::size_t field_index(std::size_t n, std::size_t channel, std::size_t pix, std::size_t channels) const {
    return (n * channels + channel) * geo.plane() + pix;
  }
  double dy(std::size_t n, std::size_t gk, std::size_t pix) const {
    return offsets[field_index(n, 2 * gk, pix, 2 * geo.taps * geo.groups)];
  }
  double dx(std::size_t n, std::size_t gk, std::size_t pix) const {
    return offsets[field_index(n, 2 * gk + 1, pix, 2 * geo.taps * geo.groups)];
  }
  double mod(std::size_t n, std::size_t gk, std::size_t pix) const {
    return geo.modulated() ? modulation[field_index(n, gk, pix, geo.taps * geo.groups)] : 1.0;
  }
  const double* plane(std::size_t n, std::size_t c) const { return x.data() + (n * geo.cin + c) * geo.plane(); }
  // v1/v2: (o, ci, k). v3: (o, ci_local).
  double weight(std::size_t o, std::size_t ci, std::size_t k) const {
    if (geo.variant == Variant::kV3) return weights[o * geo.group_channels + ci % geo.group_channels];
    return weights[(o * geo.cin + ci) * geo.taps + k];
  }
};

// Bilinear footprint of one sampling location. Corner weights follow the
// floor cell, which makes derivatives at integer coordinates right limits.
struct Footprint {
  std::int64_t y0 = 0, x0 = 0;
  double ly = 0.0, lx = 0.0;
  std::int64_t h = 0, w = 0;

  Footprint(double y, double x, std::size_t height, std::size_t width)
      : h(static_cast<std::int64_t>(height)), w(static_cast<std::int64_t>(width)) {
    const double yf = std::floor(y);
    const double xf = std::floor(x);
    ly = y - yf;
    lx = x - xf;
    const double limit = static_cast<double>(std::max(h, w)) + 2.0;
    y0 = static_cast<std::int64_t>(std::clamp(yf, -limit, limit));
    x0 = static_cast<std::int64_t>(std::clamp(xf, -limit, limit));
  }

  bool inside(std::int64_t yy, std::int64_t xx) const { return yy >= 0 && yy < h && xx >= 0 && xx < w; }

  double at(const double* plane, std::int64_t yy, std::int64_t xx) const {
    return inside(yy, xx) ? plane[yy * w + xx] : 0.0;
  }

  double value(const double* plane) const {
    return (1 - ly) * (1 - lx) * at(plane, y0, x0) + (1 - ly) * lx * at(plane, y0, x0 + 1) +
           ly * (1 - lx) * at(plane, y0 + 1, x0) + ly * lx * at(plane, y0 + 1, x0 + 1);
  }

  double d_dy(const double* plane) const {
    return (1 - lx) * (at(plane, y0 + 1, x0) - at(plane, y0, x0)) +
           lx * (at(plane, y0 + 1, x0 + 1) - at(plane, y0, x0 + 1));
  }

  double d_dx(const double* plane) const {
    return (1 - ly) * (at(plane, y0, x0 + 1) - at(plane, y0, x0)) +
           ly * (at(plane, y0 + 1, x0 + 1) - at(plane, y0 + 1, x0));
  }

  /// Adds `scale` times the corner weights into a gradient plane.
  void scatter(double* plane, double scale) const {
    const std::int64_t ys[2] = {y0, y0 + 1};
    const std::int64_t xs[2] = {x0, x0 + 1};
    const double wy[2] = {1 - ly, ly};
    const double wx[2] = {1 - lx, lx};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        if (inside(ys[a], xs[b])) plane[ys[a] * w + xs[b]] += scale * wy[a] * wx[b];
  }
};

Footprint footprint(const Problem& p, std::size_t n, std::size_t gk, std::size_t k, std::size_t pix) {
  const double i = static_cast<double>(pix / p.geo.w);
  const double j = static_cast<double>(pix % p.geo.w);
  return Footprint(i + p.geo.base[k].dy + p.dy(n, gk, pix), j + p.geo.base[k].dx + p.dx(n, gk, pix),
                   p.geo.h, p.geo.w);
}

// Per-pixel column: v1/v2 hold (ci, k) products m*S; v3 holds per-channel
// sums over taps. Fixed summation order in both cases.
void fill_column(const Problem& p, std::size_t n, std::size_t pix, std::vector<double>& col) {
  const Geometry& g = p.geo;
  if (g.variant == Variant::kV3) {
    col.assign(g.cin, 0.0);
    for (std::size_t ci = 0; ci < g.cin; ++ci) {
      const std::size_t grp = g.group_of(ci);
      double acc = 0.0;
      for (std::size_t k = 0; k < g.taps; ++k) {
        const std::size_t gk = grp * g.taps + k;
        acc += p.mod(n, gk, pix) * footprint(p, n, gk, k, pix).value(p.plane(n, ci));
      }
      col[ci] = acc;
    }
  } else {
    col.assign(g.cin * g.taps, 0.0);
    for (std::size_t k = 0; k < g.taps; ++k) {
      const Footprint fp = footprint(p, n, k, k, pix);
      const double m = p.mod(n, k, pix);
      for (std::size_t ci = 0; ci < g.cin; ++ci) col[ci * g.taps + k] = m * fp.value(p.plane(n, ci));
    }
  }
}

double output_value(const Problem& p, std::size_t o, const std::vector<double>& col) {
  const Geometry& g = p.geo;
  double acc = 0.0;
  if (g.variant == Variant::kV3) {
    const std::size_t first = (o / g.group_channels) * g.group_channels;
    for (std::size_t ci = first; ci < first + g.group_channels; ++ci) acc += p.weight(o, ci, 0) * col[ci];
  } else {
    for (std::size_t ci = 0; ci < g.cin; ++ci)
      for (std::size_t k = 0; k < g.taps; ++k) acc += p.weight(o, ci, k) * col[ci * g.taps + k];
  }
  return acc;
}

std::vector<double> forward_values(const Problem& p) {
  const Geometry& g = p.geo;
  std::vector<double> out(g.n * g.cout * g.plane());
  detail::parallel_for(g.n * g.h, [&](std::size_t row) {
    const std::size_t n = row / g.h;
    const std::size_t i = row % g.h;
    std::vector<double> col;
    for (std::size_t j = 0; j < g.w; ++j) {
      const std::size_t pix = i * g.w + j;
      fill_column(p, n, pix, col);
      for (std::size_t o = 0; o < g.cout; ++o) out[(n * g.cout + o) * g.plane() + pix] = output_value(p, o, col);
    }
  });
  return out;
}

double forward_sum(const Problem& p) {
  double total = 0.0;
  for (double v : forward_values(p)) total += v;
  return total;
}

Tensor to_float(const Geometry& g, const std::vector<double>& values) {
  std::vector<float> data(values.begin(), values.end());
  return Tensor(Shape{g.n, g.cout, g.h, g.w}, std::move(data));
}

}  // namespace

Tensor forward(Variant variant, const DeformInputs& in) {
  const Problem p(variant, in);
  return to_float(p.geo, forward_values(p));
}

Tensor dcn_forward(const Tensor& x, const DeformParams& params, const Tensor& offsets) {
  return forward(Variant::kV1, DeformInputs{x, params, offsets, std::nullopt});
}

Tensor dcnv2_forward(const Tensor& x, const DeformParams& params, const Tensor& offsets,
                     const Tensor& modulation) {
  return forward(Variant::kV2, DeformInputs{x, params, offsets, modulation});
}

Tensor dcnv3_forward(const Tensor& x, const DeformParams& params, const Tensor& offsets,
                     const Tensor& modulation) {
  return forward(Variant::kV3, DeformInputs{x, params, offsets, modulation});
}

DaoResult dao_forward(const Tensor& x, const DeformParams& params, const Tensor& offsets,
                      const Tensor& modulation, std::size_t salience_kernel) {
  DaoResult r;
  r.dcnv3 = dcnv3_forward(x, params, offsets, modulation);
  r.salient = salience::salient_map(r.dcnv3, salience_kernel);
  r.y = r.dcnv3;
  const Shape& s = r.y.shape();
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c) {
      float* dst = r.y.plane(n, c);
      const float* sal = r.salient.plane(n, 0);
      for (std::size_t i = 0; i < s.plane(); ++i) dst[i] = sal[i] * dst[i];
    }
  return r;
}

DeformGrads deform_backward(Variant variant, const DeformInputs& in, const Tensor& upstream_grad) {
  const Problem p(variant, in);
  const Geometry& g = p.geo;
  const Shape out_shape{g.n, g.cout, g.h, g.w};
  if (upstream_grad.shape() != out_shape)
    throw ArgumentError("upstream gradient has shape " + upstream_grad.shape().str() + ", expected " +
                        out_shape.str());

  const std::vector<double> up = widen(upstream_grad.data());
  std::vector<double> gx(p.x.size(), 0.0), gw(p.weights.size(), 0.0), goff(p.offsets.size(), 0.0),
      gmod(p.modulation.size(), 0.0);
  const std::size_t field = g.taps * g.groups;
  std::vector<double> col;
  std::vector<double> coeff(g.cin * g.taps);

  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t pix = 0; pix < g.plane(); ++pix) {
      auto upstream = [&](std::size_t o) { return up[(n * g.cout + o) * g.plane() + pix]; };
      fill_column(p, n, pix, col);

      // dL/dW and the per-(ci, k) coefficient sum_o g_o W[o, ci, k].
      if (g.variant == Variant::kV3) {
        for (std::size_t o = 0; o < g.cout; ++o) {
          const std::size_t first = (o / g.group_channels) * g.group_channels;
          for (std::size_t ci = first; ci < first + g.group_channels; ++ci)
            gw[o * g.group_channels + ci - first] += upstream(o) * col[ci];
        }
        for (std::size_t ci = 0; ci < g.cin; ++ci) {
          const std::size_t first = g.group_of(ci) * g.group_channels;
          double acc = 0.0;
          for (std::size_t o = first; o < first + g.group_channels; ++o) acc += upstream(o) * p.weight(o, ci, 0);
          for (std::size_t k = 0; k < g.taps; ++k) coeff[ci * g.taps + k] = acc;
        }
      } else {
        for (std::size_t o = 0; o < g.cout; ++o)
          for (std::size_t q = 0; q < g.cin * g.taps; ++q) gw[o * g.cin * g.taps + q] += upstream(o) * col[q];
        for (std::size_t ci = 0; ci < g.cin; ++ci)
          for (std::size_t k = 0; k < g.taps; ++k) {
            double acc = 0.0;
            for (std::size_t o = 0; o < g.cout; ++o) acc += upstream(o) * p.weight(o, ci, k);
            coeff[ci * g.taps + k] = acc;
          }
      }

      for (std::size_t ci = 0; ci < g.cin; ++ci) {
        const std::size_t grp = g.group_of(ci);
        const double* plane = p.plane(n, ci);
        double* gplane = gx.data() + (n * g.cin + ci) * g.plane();
        for (std::size_t k = 0; k < g.taps; ++k) {
          const std::size_t gk = grp * g.taps + k;
          const Footprint fp = footprint(p, n, gk, k, pix);
          const double c = coeff[ci * g.taps + k];
          const double m = p.mod(n, gk, pix);
          goff[p.field_index(n, 2 * gk, pix, 2 * field)] += c * m * fp.d_dy(plane);
          goff[p.field_index(n, 2 * gk + 1, pix, 2 * field)] += c * m * fp.d_dx(plane);
          if (g.modulated()) gmod[p.field_index(n, gk, pix, field)] += c * fp.value(plane);
          fp.scatter(gplane, c * m);
        }
      }
    }
  }

  DeformGrads grads{TensorD(in.x.shape(), std::move(gx)), TensorD(in.params.weights.shape(), std::move(gw)),
                    TensorD(in.offsets.shape(), std::move(goff)), std::nullopt};
  if (g.modulated()) grads.modulation = TensorD(in.modulation->shape(), std::move(gmod));
  return grads;
}

TensorD fd_gradient(Variant variant, const DeformInputs& in, Param which, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ArgumentError("fd_gradient: step must be positive");
  Problem p(variant, in);
  std::vector<double>* target = nullptr;
  Shape shape;
  switch (which) {
    case Param::kInput: target = &p.x; shape = in.x.shape(); break;
    case Param::kWeights: target = &p.weights; shape = in.params.weights.shape(); break;
    case Param::kOffsets: target = &p.offsets; shape = in.offsets.shape(); break;
    case Param::kModulation:
      if (!p.geo.modulated()) throw ArgumentError("fd_gradient: variant v1 has no modulation");
      target = &p.modulation;
      shape = in.modulation->shape();
      break;
  }
  std::vector<double> grad(target->size());
  for (std::size_t i = 0; i < target->size(); ++i) {
    const double saved = (*target)[i];
    (*target)[i] = saved + step;
    const double plus = forward_sum(p);
    (*target)[i] = saved - step;
    const double minus = forward_sum(p);
    (*target)[i] = saved;
    grad[i] = (plus - minus) / (2 * step);
  }
  return TensorD(shape, std::move(grad));
}

double max_relative_error(const TensorD& analytic, const TensorD& numeric, double floor) {
  if (analytic.shape() != numeric.shape())
    throw ArgumentError("max_relative_error: shapes differ " + analytic.shape().str() + " vs " +
                        numeric.shape().str());
  double worst = 0.0;
  const auto a = analytic.data();
  const auto f = numeric.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(f[i]), floor});
    worst = std::max(worst, std::abs(a[i] - f[i]) / denom);
  }
  return worst;
}

DeformInputs make_random_case(Variant variant, const RandomCaseSpec& spec, std::uint64_t seed) {
  if (spec.breakpoint_margin < 0.0 || spec.breakpoint_margin >= 0.5)
    throw ArgumentError("breakpoint margin must lie in [0, 0.5)");
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return detail::uniform(rng, -1.0, 1.0); };
  auto draw = [&](std::size_t count) {
    std::vector<float> v(count);
    for (auto& e : v) e = static_cast<float>(unit());
    return v;
  };

  const Shape& xs = spec.input;
  const std::size_t groups = variant == Variant::kV3 ? spec.groups : 1;
  DeformParams params;
  params.kernel_h = params.kernel_w = spec.kernel;
  params.dilation = spec.dilation;
  params.groups = groups;
  if (variant == Variant::kV3) {
    if (groups == 0 || xs.c % groups != 0) throw ArgumentError("channels not divisible by groups");
    const Shape ws{xs.c, xs.c / groups, 1, 1};
    params.weights = Tensor(ws, draw(ws.numel()));
  } else {
    const Shape ws{xs.c, xs.c, spec.kernel, spec.kernel};
    params.weights = Tensor(ws, draw(ws.numel()));
  }
  const std::size_t taps = params.taps();

  const Shape off_shape{xs.n, 2 * taps * groups, xs.h, xs.w};
  std::vector<float> offsets(off_shape.numel());
  for (auto& o : offsets) {
    for (;;) {
      const auto v = static_cast<float>(spec.offset_range * unit());
      const double frac = static_cast<double>(v) - std::floor(static_cast<double>(v));
      if (frac >= spec.breakpoint_margin && frac <= 1.0 - spec.breakpoint_margin) {
        o = v;
        break;
      }
    }
  }

  DeformInputs in{Tensor(xs, draw(xs.numel())), std::move(params), Tensor(off_shape, std::move(offsets)),
                  std::nullopt};
  if (variant != Variant::kV1) {
    const Shape mod_shape{xs.n, taps * groups, xs.h, xs.w};
    in.modulation = Tensor(mod_shape, draw(mod_shape.numel()));
  }
  return in;
}

double GradcheckReport::max() const noexcept { return std::max({input, weights, offsets, modulation}); }

GradcheckReport gradcheck(Variant variant, const DeformInputs& in, double step) {
  const Tensor probe = forward(variant, in);
  const Tensor ones = Tensor::filled(probe.shape(), 1.0f);
  const DeformGrads analytic = deform_backward(variant, in, ones);
  GradcheckReport r;
  r.input = max_relative_error(analytic.x, fd_gradient(variant, in, Param::kInput, step));
  r.weights = max_relative_error(analytic.weights, fd_gradient(variant, in, Param::kWeights, step));
  r.offsets = max_relative_error(analytic.offsets, fd_gradient(variant, in, Param::kOffsets, step));
  if (analytic.modulation)
    r.modulation = max_relative_error(*analytic.modulation, fd_gradient(variant, in, Param::kModulation, step));
  return r;
}

std::vector<Point2> trace_receptive_field(const std::vector<TraceLevel>& levels, Point2 anchor) {
  if (levels.empty()) throw ArgumentError("trace_receptive_field: no levels");
  std::vector<std::vector<Offset2>> bases;
  for (const auto& level : levels) {
    const auto& p = level.params;
    if (p.kernel_h % 2 == 0 || p.kernel_w % 2 == 0 || p.dilation == 0)
      throw ArgumentError("trace_receptive_field: kernel extents must be odd, dilation positive");
    if (level.offsets.empty() || level.offsets.shape().c < 2 * p.taps() ||
        level.offsets.shape().c % (2 * p.taps()) != 0)
      throw ArgumentError("trace_receptive_field: offset field with " +
                          std::to_string(level.offsets.shape().c) + " channels does not match " +
                          std::to_string(p.taps()) + " taps");
    bases.push_back(p.base_offsets());
  }
  const Shape& first = levels.front().offsets.shape();
  if (!(anchor.y >= 0 && anchor.x >= 0 && anchor.y <= static_cast<double>(first.h - 1) &&
        anchor.x <= static_cast<double>(first.w - 1)))
    throw ArgumentError("trace_receptive_field: anchor out of bounds");

  std::vector<Point2> out;
  std::function<void(Point2, std::size_t)> expand = [&](Point2 q, std::size_t level) {
    if (level == levels.size()) {
      out.push_back(q);
      return;
    }
    const Tensor& off = levels[level].offsets;
    const Shape& s = off.shape();
    const auto r = static_cast<std::size_t>(std::clamp(std::round(q.y), 0.0, static_cast<double>(s.h - 1)));
    const auto c = static_cast<std::size_t>(std::clamp(std::round(q.x), 0.0, static_cast<double>(s.w - 1)));
    const auto& base = bases[level];
    for (std::size_t k = 0; k < base.size(); ++k) {
      const Point2 next{q.y + base[k].dy + off(0, 2 * k, r, c), q.x + base[k].dx + off(0, 2 * k + 1, r, c)};
      expand(next, level + 1);
    }
  };
  expand(anchor, 0);
  return out;
}

}  // namespace panops::deform
