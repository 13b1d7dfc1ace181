// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "cli_util.hpp"

namespace panops::cli {
namespace {

// ---------------------------------------------------------------------------
// Shared flag groups

struct WarpFlags {
  double fov_h = 90.0;
  double fov_v = 90.0;
  std::uint32_t out_h = 0;
  std::uint32_t out_w = 0;
  int fill = 0;
  std::string interp = "bilinear";
  double radius = 1.0;
  double lambda0 = 0.0;
  double phi0 = 0.0;
  double phi1 = 0.0;

  void add(CLI::App* app) {
    app->add_option("--fov-h", fov_h, "Horizontal field of view in degrees, (0, 180)")->capture_default_str();
    app->add_option("--fov-v", fov_v, "Vertical field of view in degrees, (0, 180)")->capture_default_str();
    app->add_option("--out-h", out_h, "Output height in pixels (0 = input height)")->capture_default_str();
    app->add_option("--out-w", out_w, "Output width in pixels (0 = input width)")->capture_default_str();
    app->add_option("--fill", fill, "Value for pixels outside the source frustum")
        ->check(CLI::Range(0, 255))
        ->capture_default_str();
    app->add_option("--interp", interp, "Image interpolation")
        ->check(CLI::IsMember({"bilinear", "nearest"}))
        ->capture_default_str();
    app->add_option("--radius", radius, "Globe radius R")->capture_default_str();
    app->add_option("--lambda0", lambda0, "Central meridian in degrees")->capture_default_str();
    app->add_option("--phi0", phi0, "Central parallel in degrees")->capture_default_str();
    app->add_option("--phi1", phi1, "Standard parallel in degrees, (-90, 90)")->capture_default_str();
  }

  void validate() const {
    if (!(fov_h > 0 && fov_h < 180) || !(fov_v > 0 && fov_v < 180))
      throw UsageError("--fov-h and --fov-v must lie in (0, 180) degrees");
    if ((out_h == 0) != (out_w == 0)) throw UsageError("--out-h and --out-w must be given together");
    if (!(radius > 0) || !std::isfinite(radius)) throw UsageError("--radius must be positive");
    if (!(phi1 > -90 && phi1 < 90)) throw UsageError("--phi1 must lie in (-90, 90) degrees");
  }

  panops_warp_spec spec() const {
    panops_warp_spec s;
    panops_warp_spec_default(&s);
    s.fov_h = fov_h * kDegree;
    s.fov_v = fov_v * kDegree;
    s.out_h = out_h;
    s.out_w = out_w;
    s.fill = static_cast<std::uint8_t>(fill);
    s.interpolation = interp == "nearest" ? PANOPS_NEAREST : PANOPS_BILINEAR;
    return s;
  }

  panops_erp_params erp() const { return {radius, lambda0 * kDegree, phi0 * kDegree, phi1 * kDegree}; }

  json to_json() const {
    return {{"fov_h_deg", fov_h}, {"fov_v_deg", fov_v}, {"out_h", out_h},     {"out_w", out_w},
            {"fill", fill},       {"interp", interp},   {"radius", radius},   {"lambda0_deg", lambda0},
            {"phi0_deg", phi0},   {"phi1_deg", phi1}};
  }
};

struct KernelFlags {
  std::uint32_t kernel = 3;
  std::uint32_t dilation = 1;
  std::uint32_t groups = 1;

  void add(CLI::App* app, bool grouped) {
    app->add_option("--kernel", kernel, "Square kernel extent (odd)")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--dilation", dilation, "Kernel dilation")->check(CLI::PositiveNumber)->capture_default_str();
    if (grouped)
      app->add_option("--groups", groups, "Aggregation groups")->check(CLI::PositiveNumber)->capture_default_str();
  }

  void validate() const {
    if (kernel % 2 == 0) throw UsageError("--kernel must be odd");
  }

  panops_deform_config config() const { return {kernel, kernel, dilation, groups}; }
  std::uint64_t taps() const { return std::uint64_t{kernel} * kernel; }
  json to_json() const { return {{"kernel", kernel}, {"dilation", dilation}, {"groups", groups}}; }
};

std::string report_path(const std::string& flag, const std::string& out) {
  return flag.empty() ? default_report_path(out) : flag;
}

void expect_shape(const std::string& path, const char* role, const Shape4& got, const Shape4& want) {
  if (got != want)
    throw DataError(path + ": " + role + " tensor has shape " + shape_str(got) + ", expected " + shape_str(want));
}

// ---------------------------------------------------------------------------
// warp

struct WarpOpts {
  std::string in, out, labels, labels_out, report;
  WarpFlags warp;
};

void run_warp(const WarpOpts& o) {
  o.warp.validate();
  if (o.labels.empty() != o.labels_out.empty()) throw UsageError("--labels and --labels-out must be given together");
  const panops_warp_spec spec = o.warp.spec();
  const panops_erp_params erp = o.warp.erp();
  Report r("warp");
  r.parameters() = o.warp.to_json();

  auto img = load_image(o.in);
  panops_image* out = nullptr;
  check(panops_warp_pinhole_to_erp(img.get(), &spec, &erp, &out), o.in);
  ImagePtr warped(out);
  save_image(warped.get(), o.out);
  r.input("image", o.in);
  r.output("image", o.out);

  if (!o.labels.empty()) {
    auto labels = load_labels(o.labels);
    panops_labels* lout = nullptr;
    check(panops_warp_labels_to_erp(labels.get(), &spec, &erp, &lout), o.labels);
    LabelsPtr keep(lout);
    save_labels(keep.get(), o.labels_out);
    r.input("labels", o.labels);
    r.output("labels", o.labels_out);
  }
  r.write(report_path(o.report, o.out));
}

void add_warp(CLI::App& app) {
  auto o = std::make_shared<WarpOpts>();
  auto* sub = app.add_subcommand("warp", "Re-render a pinhole image on an equirectangular grid");
  sub->add_option("--in", o->in, "Input PNG (gray or RGB)")->required();
  sub->add_option("--out", o->out, "Output PNG")->required();
  sub->add_option("--labels", o->labels, "Optional label-id PNG warped with nearest sampling");
  sub->add_option("--labels-out", o->labels_out, "Output label-id PNG (unmapped pixels get 255)");
  sub->add_option("--report", o->report, "JSON report path (default: <out>.json)");
  o->warp.add(sub);
  sub->callback([o] { run_warp(*o); });
}

// ---------------------------------------------------------------------------
// rerp

struct RerpOpts {
  std::string in, out, labels, labels_out, shuffled_out, report;
  std::uint32_t grid = 2;
  std::uint64_t seed = 0;
  WarpFlags warp;
};

void run_rerp(const RerpOpts& o) {
  o.warp.validate();
  if (o.labels.empty() != o.labels_out.empty()) throw UsageError("--labels and --labels-out must be given together");
  const panops_warp_spec spec = o.warp.spec();
  const panops_erp_params erp = o.warp.erp();
  Report r("rerp");
  r.parameters() = o.warp.to_json();
  r.parameters()["grid"] = o.grid;
  r.parameters()["seed"] = o.seed;

  auto img = load_image(o.in);
  LabelsPtr labels;
  if (!o.labels.empty()) labels = load_labels(o.labels);
  std::vector<std::uint32_t> perm(std::size_t{o.grid} * o.grid);
  panops_image* out = nullptr;
  panops_image* shuffled = nullptr;
  panops_labels* lout = nullptr;
  check(panops_rerp_augment(img.get(), labels.get(), o.grid, o.seed, &spec, &erp, &out, labels ? &lout : nullptr,
                            &shuffled, perm.data()),
        o.in);
  ImagePtr keep_out(out), keep_shuffled(shuffled);
  LabelsPtr keep_labels(lout);

  save_image(out, o.out);
  r.input("image", o.in);
  r.output("image", o.out);
  if (!o.shuffled_out.empty()) {
    save_image(shuffled, o.shuffled_out);
    r.output("shuffled", o.shuffled_out);
  }
  if (labels) {
    save_labels(lout, o.labels_out);
    r.input("labels", o.labels);
    r.output("labels", o.labels_out);
  }
  r["permutation"] = perm;
  r.write(report_path(o.report, o.out));
}

void add_rerp(CLI::App& app) {
  auto o = std::make_shared<RerpOpts>();
  auto* sub = app.add_subcommand("rerp", "Shuffle grid x grid tiles, then warp to equirectangular");
  sub->add_option("--in", o->in, "Input PNG")->required();
  sub->add_option("--out", o->out, "Output PNG")->required();
  sub->add_option("--grid", o->grid, "Tiles per side (grid^2 tiles)")->check(CLI::Range(1, 255))->capture_default_str();
  sub->add_option("--seed", o->seed, "Shuffle seed")->required();
  sub->add_option("--labels", o->labels, "Optional label-id PNG, shuffled with the same permutation");
  sub->add_option("--labels-out", o->labels_out, "Output label-id PNG");
  sub->add_option("--shuffled-out", o->shuffled_out, "Also write the shuffled image before warping");
  sub->add_option("--report", o->report, "JSON report path (default: <out>.json)");
  o->warp.add(sub);
  sub->callback([o] { run_rerp(*o); });
}

// ---------------------------------------------------------------------------
// rotate

struct RotateOpts {
  std::string in, out, labels, labels_out, report;
  std::optional<std::int64_t> shift;
  std::optional<double> degrees;
};

void run_rotate(const RotateOpts& o) {
  if (o.shift.has_value() == o.degrees.has_value()) throw UsageError("give exactly one of --shift or --degrees");
  if (o.labels.empty() != o.labels_out.empty()) throw UsageError("--labels and --labels-out must be given together");
  auto img = load_image(o.in);
  std::uint32_t h = 0, w = 0, c = 0;
  panops_image_info(img.get(), &h, &w, &c);
  const std::int64_t shift = o.shift ? *o.shift : std::llround(*o.degrees / 360.0 * static_cast<double>(w));

  Report r("rotate");
  r.parameters() = {{"shift", shift}};
  if (o.degrees) r.parameters()["degrees"] = *o.degrees;

  panops_image* out = nullptr;
  check(panops_horizontal_rotate(img.get(), shift, &out), o.in);
  ImagePtr keep(out);
  save_image(out, o.out);
  r.input("image", o.in);
  r.output("image", o.out);
  if (!o.labels.empty()) {
    auto labels = load_labels(o.labels);
    std::uint32_t lh = 0, lw = 0;
    panops_labels_info(labels.get(), &lh, &lw);
    if (lh != h || lw != w)
      throw DataError(o.labels + ": label map is " + std::to_string(lh) + "x" + std::to_string(lw) + ", expected " +
                      std::to_string(h) + "x" + std::to_string(w));
    panops_labels* lout = nullptr;
    check(panops_labels_horizontal_rotate(labels.get(), shift, &lout), o.labels);
    LabelsPtr keep_labels(lout);
    save_labels(lout, o.labels_out);
    r.input("labels", o.labels);
    r.output("labels", o.labels_out);
  }
  r.write(report_path(o.report, o.out));
}

void add_rotate(CLI::App& app) {
  auto o = std::make_shared<RotateOpts>();
  auto* sub = app.add_subcommand("rotate", "Circularly shift a panorama horizontally");
  sub->add_option("--in", o->in, "Input panorama PNG")->required();
  sub->add_option("--out", o->out, "Output PNG")->required();
  sub->add_option("--shift", o->shift, "Shift in pixels; column c moves to (c + shift) mod width");
  sub->add_option("--degrees", o->degrees, "Shift as a yaw angle in degrees (rounded to whole pixels)");
  sub->add_option("--labels", o->labels, "Optional label-id PNG rotated identically");
  sub->add_option("--labels-out", o->labels_out, "Output label-id PNG");
  sub->add_option("--report", o->report, "JSON report path (default: <out>.json)");
  sub->callback([o] { run_rotate(*o); });
}

// ---------------------------------------------------------------------------
// salient

struct SalientOpts {
  std::string in, out, similarity_out, report;
  std::uint32_t kernel = 3;
};

void run_salient(const SalientOpts& o) {
  if (o.kernel < 3 || o.kernel % 2 == 0) throw UsageError("--kernel must be odd and >= 3");
  auto f = load_tensor(o.in);
  panops_tensor* s = nullptr;
  check(panops_salient_map(f.get(), o.kernel, &s), o.in);
  TensorPtr keep(s);
  save_tensor(s, o.out);
  Report r("salient");
  r.parameters() = {{"kernel", o.kernel}};
  r.input("features", o.in);
  r.output("salient", o.out);
  if (!o.similarity_out.empty()) {
    panops_tensor* sim = nullptr;
    check(panops_patch_cosine_similarity(f.get(), o.kernel, &sim), o.in);
    TensorPtr keep_sim(sim);
    save_tensor(sim, o.similarity_out);
    r.output("similarity", o.similarity_out);
  }
  r["upper_bound"] = panops_salience_upper_bound(o.kernel);
  r.write(report_path(o.report, o.out));
}

void add_salient(CLI::App& app) {
  auto o = std::make_shared<SalientOpts>();
  auto* sub = app.add_subcommand("salient", "Salient map of a feature tensor");
  sub->add_option("--in", o->in, "Feature tensor (PTNS)")->required();
  sub->add_option("--out", o->out, "Salient map tensor (n, 1, h, w)")->required();
  sub->add_option("--kernel", o->kernel, "Window extent (odd, >= 3)")->capture_default_str();
  sub->add_option("--similarity-out", o->similarity_out, "Also write the (n, k*k, h, w) similarity tensor");
  sub->add_option("--report", o->report, "JSON report path (default: <out>.json)");
  sub->callback([o] { run_salient(*o); });
}

// ---------------------------------------------------------------------------
// dcn / dcnv2 / dcnv3 / dcnv4 / dao

enum class Op { kDcn, kDcnv2, kDcnv3, kDcnv4, kDao };

struct DeformOpts {
  Op op = Op::kDcn;
  std::string name;
  std::string x, weights, offsets, modulation, out, salient_out, report;
  std::uint32_t salience_kernel = 3;
  KernelFlags kernel;
};

void run_deform(const DeformOpts& o) {
  o.kernel.validate();
  const bool grouped = o.op == Op::kDcnv3 || o.op == Op::kDcnv4 || o.op == Op::kDao;
  const bool modulated = o.op != Op::kDcn;
  if (o.op == Op::kDao && (o.salience_kernel < 3 || o.salience_kernel % 2 == 0))
    throw UsageError("--salience-kernel must be odd and >= 3");

  auto x = load_tensor(o.x);
  auto w = load_tensor(o.weights);
  auto off = load_tensor(o.offsets);
  TensorPtr mod;
  if (modulated) mod = load_tensor(o.modulation);

  const Shape4 xs = tensor_shape(x.get());
  const std::uint64_t groups = grouped ? o.kernel.groups : 1;
  const std::uint64_t k = o.kernel.taps();
  if (grouped && xs[1] % groups != 0)
    throw DataError(o.x + ": input has " + std::to_string(xs[1]) + " channels, not divisible by --groups " +
                    std::to_string(groups));
  const Shape4 ws = tensor_shape(w.get());
  if (grouped) {
    expect_shape(o.weights, "weights", ws, {xs[1], xs[1] / groups, 1, 1});
  } else if (ws[1] != xs[1] || ws[2] != o.kernel.kernel || ws[3] != o.kernel.kernel) {
    throw DataError(o.weights + ": weights tensor has shape " + shape_str(ws) + ", expected (C_out, " +
                    std::to_string(xs[1]) + ", " + std::to_string(o.kernel.kernel) + ", " +
                    std::to_string(o.kernel.kernel) + ")");
  }
  expect_shape(o.offsets, "offsets", tensor_shape(off.get()), {xs[0], 2 * k * groups, xs[2], xs[3]});
  if (modulated) expect_shape(o.modulation, "modulation", tensor_shape(mod.get()), {xs[0], k * groups, xs[2], xs[3]});

  const panops_deform_config cfg = o.kernel.config();
  Report r(o.name);
  r.parameters() = o.kernel.to_json();
  r.parameters()["groups"] = groups;
  r.input("x", o.x);
  r.input("weights", o.weights);
  r.input("offsets", o.offsets);
  if (modulated) r.input("modulation", o.modulation);

  panops_tensor* y = nullptr;
  panops_tensor* sal = nullptr;
  panops_status st = PANOPS_OK;
  switch (o.op) {
    case Op::kDcn: st = panops_dcn_forward(&cfg, x.get(), w.get(), off.get(), &y); break;
    case Op::kDcnv2: st = panops_dcnv2_forward(&cfg, x.get(), w.get(), off.get(), mod.get(), &y); break;
    case Op::kDcnv3: st = panops_dcnv3_forward(&cfg, x.get(), w.get(), off.get(), mod.get(), &y); break;
    case Op::kDcnv4: st = panops_dcnv4_forward(&cfg, x.get(), w.get(), off.get(), mod.get(), &y); break;
    case Op::kDao:
      st = panops_dao_forward(&cfg, x.get(), w.get(), off.get(), mod.get(), o.salience_kernel, &y, &sal);
      break;
  }
  check(st, o.name);
  TensorPtr keep_y(y), keep_sal(sal);
  save_tensor(y, o.out);
  r.output("y", o.out);
  if (o.op == Op::kDao) {
    r.parameters()["salience_kernel"] = o.salience_kernel;
    const std::string sal_path = o.salient_out.empty()
                                     ? std::filesystem::path(o.out).replace_extension(".salient.ptns").string()
                                     : o.salient_out;
    save_tensor(sal, sal_path);
    r.output("salient", sal_path);
  }
  r.write(report_path(o.report, o.out));
}

void add_deform(CLI::App& app, Op op, const std::string& name, const std::string& help) {
  auto o = std::make_shared<DeformOpts>();
  o->op = op;
  o->name = name;
  const bool grouped = op == Op::kDcnv3 || op == Op::kDcnv4 || op == Op::kDao;
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--x", o->x, "Input tensor (n, C, h, w)")->required();
  sub->add_option("--weights", o->weights,
                  grouped ? "Per-group projection (C, C/groups, 1, 1)" : "Weights (C_out, C, k, k)")
      ->required();
  sub->add_option("--offsets", o->offsets, "Offsets (n, 2*k*k*groups, h, w), (dy, dx) pairs")->required();
  if (op != Op::kDcn)
    sub->add_option("--mod", o->modulation, "Modulation (n, k*k*groups, h, w)")->required();
  sub->add_option("--out", o->out, "Output tensor")->required();
  if (op == Op::kDao) {
    sub->add_option("--salience-kernel", o->salience_kernel, "Salience window extent (odd, >= 3)")
        ->capture_default_str();
    sub->add_option("--salient-out", o->salient_out, "Salient map tensor (default: <out>.salient.ptns)");
  }
  sub->add_option("--report", o->report, "JSON report path (default: <out>.json)");
  o->kernel.add(sub, grouped);
  sub->callback([o] { run_deform(*o); });
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckOpts {
  std::string variant = "dcnv2";
  std::uint64_t seed = 0;
  std::string shape = "1,2,4,4";
  KernelFlags kernel;
  double step = 1e-3;
  double offset_range = 1.5;
  double margin = 2e-3;
  double tolerance = 1e-3;
  std::string report;
};

void run_gradcheck(const GradcheckOpts& o) {
  o.kernel.validate();
  if (!(o.step > 0)) throw UsageError("--step must be positive");
  const panops_variant v = o.variant == "dcn" ? PANOPS_DCN : o.variant == "dcnv2" ? PANOPS_DCNV2 : PANOPS_DCNV3;
  panops_random_case_spec spec;
  panops_random_case_spec_default(&spec);
  const Shape4 s = parse_shape(o.shape);
  std::copy(s.begin(), s.end(), spec.shape);
  spec.kernel = o.kernel.kernel;
  spec.dilation = o.kernel.dilation;
  spec.groups = v == PANOPS_DCNV3 ? o.kernel.groups : 1;
  spec.offset_range = o.offset_range;
  spec.breakpoint_margin = o.margin;
  panops_gradcheck_report g{};
  check(panops_gradcheck_random(v, &spec, o.seed, o.step, &g), "gradcheck");

  Report r("gradcheck");
  r.parameters() = o.kernel.to_json();
  r.parameters()["groups"] = spec.groups;
  r.parameters()["variant"] = o.variant;
  r.parameters()["seed"] = o.seed;
  r.parameters()["shape"] = s;
  r.parameters()["step"] = o.step;
  r.parameters()["offset_range"] = o.offset_range;
  r.parameters()["breakpoint_margin"] = std::max(o.margin, 2 * o.step);
  r.parameters()["tolerance"] = o.tolerance;
  r["per_parameter"] = {{"input", g.input}, {"weights", g.weights}, {"offsets", g.offsets}};
  if (v != PANOPS_DCN) r["per_parameter"]["modulation"] = g.modulation;
  r["max_rel_err"] = g.max;
  r["passed"] = g.max < o.tolerance;
  std::cout << r.doc().dump(2) << '\n';
  if (!o.report.empty()) r.write(o.report);
}

void add_gradcheck(CLI::App& app) {
  auto o = std::make_shared<GradcheckOpts>();
  auto* sub = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  sub->add_option("--variant", o->variant, "Operator")
      ->check(CLI::IsMember({"dcn", "dcnv2", "dcnv3", "dcnv4"}))
      ->capture_default_str();
  sub->add_option("--seed", o->seed, "Seed of the random instance")->required();
  sub->add_option("--shape", o->shape, "Input shape n,c,h,w")->capture_default_str();
  sub->add_option("--step", o->step, "Finite-difference step")->capture_default_str();
  sub->add_option("--offset-range", o->offset_range, "Offsets drawn from [-r, r]")->capture_default_str();
  sub->add_option("--margin", o->margin, "Minimum distance of sampling coordinates from integers")
      ->capture_default_str();
  sub->add_option("--tolerance", o->tolerance, "Pass threshold on max_rel_err")->capture_default_str();
  sub->add_option("--report", o->report, "Also write the JSON report to this path");
  o->kernel.add(sub, true);
  sub->callback([o] { run_gradcheck(*o); });
}

// ---------------------------------------------------------------------------
// trace-offsets

struct TraceOpts {
  std::vector<std::string> offsets;
  std::optional<std::uint64_t> seed;
  std::uint32_t levels = 2;
  std::string size = "32x32";
  std::string anchor;
  std::string base;
  std::string out, report;
  double offset_range = 1.0;
  std::uint32_t scale = 4;
  KernelFlags kernel;
};

std::pair<std::uint32_t, std::uint32_t> parse_pair(const std::string& text, char sep, const char* flag) {
  const auto pos = text.find(sep);
  try {
    if (pos == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const long a = std::stol(text.substr(0, pos), &used);
    if (used != pos) throw std::invalid_argument(text);
    const std::string rest = text.substr(pos + 1);
    const long b = std::stol(rest, &used);
    if (used != rest.size() || a < 0 || b < 0) throw std::invalid_argument(text);
    return {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  } catch (const std::logic_error&) {
    throw UsageError(std::string(flag) + " expects two non-negative integers separated by '" + sep + "'");
  }
}

void run_trace(const TraceOpts& o) {
  o.kernel.validate();
  if (o.scale == 0) throw UsageError("--scale must be positive");
  if (o.offsets.empty() && !o.seed) throw UsageError("--seed is required when no --offsets files are given");
  const std::uint64_t k = o.kernel.taps();

  ImagePtr base;
  std::uint32_t h = 0, w = 0, ch = 0;
  if (!o.base.empty()) {
    base = load_image(o.base);
    panops_image_info(base.get(), &h, &w, &ch);
  }

  Report r("trace-offsets");
  std::vector<TensorPtr> fields;
  if (!o.offsets.empty()) {
    for (const auto& path : o.offsets) {
      auto t = load_tensor(path);
      const Shape4 s = tensor_shape(t.get());
      if (fields.empty() && !base) {
        h = static_cast<std::uint32_t>(s[2]);
        w = static_cast<std::uint32_t>(s[3]);
      }
      expect_shape(path, "offsets", s, {1, 2 * k, h, w});
      r.input("offsets_" + std::to_string(fields.size()), path);
      fields.push_back(std::move(t));
    }
  } else {
    if (!base) std::tie(h, w) = parse_pair(o.size, 'x', "--size");
    if (h == 0 || w == 0) throw UsageError("--size must be positive");
    for (std::uint32_t level = 0; level < o.levels; ++level) {
      const std::uint64_t shape[4] = {1, 2 * k, h, w};
      panops_tensor* t = nullptr;
      check(panops_tensor_random(shape, *o.seed + level, static_cast<float>(-o.offset_range),
                                 static_cast<float>(o.offset_range), &t),
            "trace-offsets");
      fields.emplace_back(t);
    }
  }
  if (base) r.input("base", o.base);

  auto [ay, ax] = o.anchor.empty() ? std::pair<std::uint32_t, std::uint32_t>{h / 2, w / 2}
                                   : parse_pair(o.anchor, ',', "--anchor");
  std::vector<panops_deform_config> cfgs(fields.size(), o.kernel.config());
  std::vector<const panops_tensor*> ptrs;
  for (const auto& f : fields) ptrs.push_back(f.get());
  std::size_t expected = 1;
  for (std::size_t i = 0; i < fields.size(); ++i) expected *= k;
  std::vector<double> pts(2 * expected);
  std::size_t count = 0;
  check(panops_trace_receptive_field(cfgs.data(), ptrs.data(), ptrs.size(), ay, ax, pts.data(), expected, &count),
        "trace-offsets");

  // Upscale the base (or a gray canvas) so the marks stay legible.
  const std::uint32_t sh = h * o.scale, sw = w * o.scale;
  const std::uint32_t out_ch = base ? ch : 1;
  std::vector<std::uint8_t> canvas(std::size_t{sh} * sw * out_ch, 128);
  if (base) {
    const std::uint8_t* src = panops_image_data(base.get());
    for (std::uint32_t y = 0; y < sh; ++y)
      for (std::uint32_t x = 0; x < sw; ++x)
        for (std::uint32_t c = 0; c < out_ch; ++c)
          canvas[(std::size_t{y} * sw + x) * out_ch + c] =
              src[(std::size_t{y / o.scale} * w + x / o.scale) * out_ch + c];
  }
  panops_image* canvas_img = nullptr;
  check(panops_image_create(sh, sw, out_ch, canvas.data(), &canvas_img), "trace-offsets");
  ImagePtr keep_canvas(canvas_img);

  const double sc = o.scale;
  auto to_canvas = [sc](double v) { return (v + 0.5) * sc - 0.5; };
  const double anchor[2] = {to_canvas(ay), to_canvas(ax)};
  std::vector<double> scaled(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) scaled[i] = to_canvas(pts[i]);
  panops_image* overlay = nullptr;
  panops_render_stats stats{};
  check(panops_render_offsets(canvas_img, anchor, 1, scaled.data(), count, &overlay, &stats), "trace-offsets");
  ImagePtr keep_overlay(overlay);
  save_image(overlay, o.out);

  r.parameters() = o.kernel.to_json();
  r.parameters()["levels"] = fields.size();
  r.parameters()["anchor"] = {ay, ax};
  r.parameters()["scale"] = o.scale;
  r.parameters()["field_size"] = {h, w};
  if (o.offsets.empty()) {
    r.parameters()["seed"] = *o.seed;
    r.parameters()["offset_range"] = o.offset_range;
  }
  json points = json::array();
  for (std::size_t i = 0; i < count; ++i) points.push_back({pts[2 * i], pts[2 * i + 1]});
  r["point_count"] = count;
  r["points"] = std::move(points);
  r["anchors_drawn"] = stats.anchors_drawn;
  r["offsets_drawn"] = stats.offsets_drawn;
  r["clipped"] = stats.clipped;
  r.output("overlay", o.out);
  r.write(report_path(o.report, o.out));
}

void add_trace(CLI::App& app) {
  auto o = std::make_shared<TraceOpts>();
  auto* sub = app.add_subcommand("trace-offsets", "Trace a multi-level deformable receptive field and render it");
  sub->add_option("--offsets", o->offsets, "Offset field per level (1, 2*k*k, h, w); repeat per level");
  sub->add_option("--seed", o->seed, "Seed for random offset fields when --offsets is absent");
  sub->add_option("--levels", o->levels, "Number of random levels")->check(CLI::Range(1, 4))->capture_default_str();
  sub->add_option("--offset-range", o->offset_range, "Random offsets drawn from [-r, r]")->capture_default_str();
  sub->add_option("--size", o->size, "Field size HxW when neither --base nor --offsets is given")
      ->capture_default_str();
  sub->add_option("--anchor", o->anchor, "Anchor pixel y,x (default: centre)");
  sub->add_option("--base", o->base, "Base PNG; must match the field size");
  sub->add_option("--scale", o->scale, "Integer upscaling of the overlay")->capture_default_str();
  sub->add_option("--out", o->out, "Overlay PNG")->required();
  sub->add_option("--report", o->report, "JSON report path (default: <out>.json)");
  o->kernel.add(sub, false);
  sub->callback([o] { run_trace(*o); });
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  std::vector<std::string> pred, gt;
  std::uint32_t classes = 0;
  std::string sim, palette, report;
};

LabelsPtr load_eval_labels(const std::string& path, const panops_palette* palette) {
  if (!palette) return load_labels(path);
  auto img = load_image(path);
  panops_labels* l = nullptr;
  check(panops_decode_labels(img.get(), palette, &l), path);
  return LabelsPtr(l);
}

json per_class_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(std::isnan(x) ? json(nullptr) : json(x));
  return out;
}

void run_eval(const EvalOpts& o) {
  if (o.pred.size() != o.gt.size()) throw UsageError("--pred and --gt must list the same number of files");
  Report r("eval");
  r.parameters() = {{"classes", o.classes}, {"ignore_id", 255}};

  PalettePtr palette;
  if (!o.palette.empty()) {
    panops_palette* p = nullptr;
    check(panops_palette_load(o.palette.c_str(), &p), o.palette);
    palette.reset(p);
    r.input("palette", o.palette);
  }
  SimilarityPtr sim;
  panops_similarity* s = nullptr;
  if (o.sim.empty()) {
    check(panops_similarity_identity(o.classes, &s), "eval");
    sim.reset(s);
  } else {
    check(panops_similarity_load(o.sim.c_str(), &s), o.sim);
    sim.reset(s);
    if (panops_similarity_size(s) != o.classes)
      throw DataError(o.sim + ": similarity matrix is " + std::to_string(panops_similarity_size(s)) + "x" +
                      std::to_string(panops_similarity_size(s)) + ", expected " + std::to_string(o.classes) + "x" +
                      std::to_string(o.classes));
    r.input("similarity", o.sim);
  }
  r.parameters()["similarity"] = o.sim.empty() ? "identity" : "file";

  panops_confusion* m = nullptr;
  check(panops_confusion_create(o.classes, &m), "eval");
  ConfusionPtr conf(m);
  for (std::size_t i = 0; i < o.pred.size(); ++i) {
    auto pred = load_eval_labels(o.pred[i], palette.get());
    auto gt = load_eval_labels(o.gt[i], palette.get());
    check(panops_confusion_accumulate(m, pred.get(), gt.get()), o.pred[i] + " vs " + o.gt[i]);
    r.input("pred_" + std::to_string(i), o.pred[i]);
    r.input("gt_" + std::to_string(i), o.gt[i]);
  }

  std::vector<double> iou(o.classes), open(o.classes);
  double miou = 0, open_miou = 0;
  check(panops_miou(m, iou.data(), &miou), "eval");
  check(panops_open_miou(m, sim.get(), open.data(), &open_miou), "eval");
  json names = json::array();
  for (std::size_t c = 0; c < o.classes; ++c) names.push_back(panops_similarity_name(sim.get(), c));
  r["categories"] = std::move(names);
  r["per_class_iou"] = per_class_json(iou);
  r["per_class_open_iou"] = per_class_json(open);
  r["miou"] = miou;
  r["open_miou"] = open_miou;
  r["pixels"] = panops_confusion_total(m);
  std::cout << r.doc().dump(2) << '\n';
  if (!o.report.empty()) r.write(o.report);
}

void add_eval(CLI::App& app) {
  auto o = std::make_shared<EvalOpts>();
  auto* sub = app.add_subcommand("eval", "mIoU and open mIoU of predicted label maps");
  sub->add_option("--pred", o->pred, "Predicted label PNGs")->required();
  sub->add_option("--gt", o->gt, "Ground-truth label PNGs (255 = ignore)")->required();
  sub->add_option("--classes", o->classes, "Number of categories")->check(CLI::Range(1, 255))->required();
  sub->add_option("--sim", o->sim, "Similarity matrix CSV (default: identity)");
  sub->add_option("--palette", o->palette, "Decode colour-coded PNGs with this palette CSV");
  sub->add_option("--report", o->report, "Also write the JSON report to this path");
  sub->callback([o] { run_eval(*o); });
}

// ---------------------------------------------------------------------------
// sim-from-taxonomy

struct SimOpts {
  std::string taxonomy, categories, categories_file, out, report;
};

std::vector<std::string> split_names(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto first = item.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    out.push_back(item.substr(first, item.find_last_not_of(" \t\r") - first + 1));
  }
  return out;
}

void run_sim(const SimOpts& o) {
  if (o.categories.empty() == o.categories_file.empty())
    throw UsageError("give exactly one of --categories or --categories-file");
  Report r("sim-from-taxonomy");
  std::vector<std::string> names;
  if (!o.categories.empty()) {
    names = split_names(o.categories, ',');
  } else {
    std::ifstream in(o.categories_file);
    if (!in) throw DataError(o.categories_file + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    names = split_names(ss.str(), '\n');
    r.input("categories", o.categories_file);
  }
  if (names.empty()) throw UsageError("no categories given");
  panops_taxonomy* t = nullptr;
  check(panops_taxonomy_load(o.taxonomy.c_str(), &t), o.taxonomy);
  TaxonomyPtr tax(t);
  std::vector<const char*> cnames;
  for (const auto& n : names) cnames.push_back(n.c_str());
  panops_similarity* s = nullptr;
  check(panops_similarity_from_taxonomy(t, cnames.data(), cnames.size(), &s), o.taxonomy);
  SimilarityPtr sim(s);
  check(panops_similarity_save(s, o.out.c_str()), o.out);
  r.parameters() = {{"categories", names}, {"measure", "wu-palmer"}};
  r.input("taxonomy", o.taxonomy);
  r.output("similarity", o.out);
  r.write(report_path(o.report, o.out));
}

void add_sim(CLI::App& app) {
  auto o = std::make_shared<SimOpts>();
  auto* sub = app.add_subcommand("sim-from-taxonomy", "Wu-Palmer similarity matrix from a category taxonomy");
  sub->add_option("--taxonomy", o->taxonomy, "Lines 'child<TAB>parent'; the root's parent is '-'")->required();
  sub->add_option("--categories", o->categories, "Comma-separated category names in id order");
  sub->add_option("--categories-file", o->categories_file, "One category name per line, in id order");
  sub->add_option("--out", o->out, "Similarity CSV")->required();
  sub->add_option("--report", o->report, "JSON report path (default: <out>.json)");
  sub->callback([o] { run_sim(*o); });
}

// ---------------------------------------------------------------------------
// make-tensor

struct MakeTensorOpts {
  std::string shape, out, report;
  std::optional<std::uint64_t> seed;
  std::optional<float> value;
  float lo = -1.0f, hi = 1.0f;
};

void run_make_tensor(const MakeTensorOpts& o) {
  if (o.seed.has_value() == o.value.has_value()) throw UsageError("give exactly one of --seed or --value");
  if (!(o.lo < o.hi)) throw UsageError("--lo must be below --hi");
  const Shape4 s = parse_shape(o.shape);
  panops_tensor* t = nullptr;
  Report r("make-tensor");
  r.parameters() = {{"shape", s}};
  if (o.seed) {
    check(panops_tensor_random(s.data(), *o.seed, o.lo, o.hi, &t), "make-tensor");
    r.parameters()["seed"] = *o.seed;
    r.parameters()["lo"] = o.lo;
    r.parameters()["hi"] = o.hi;
  } else {
    const std::vector<float> data(s[0] * s[1] * s[2] * s[3], *o.value);
    check(panops_tensor_create(s.data(), data.data(), &t), "make-tensor");
    r.parameters()["value"] = *o.value;
  }
  TensorPtr keep(t);
  save_tensor(t, o.out);
  r.output("tensor", o.out);
  r.write(report_path(o.report, o.out));
}

void add_make_tensor(CLI::App& app) {
  auto o = std::make_shared<MakeTensorOpts>();
  auto* sub = app.add_subcommand("make-tensor", "Write a constant or seeded uniform-random tensor");
  sub->add_option("--shape", o->shape, "Shape n,c,h,w")->required();
  sub->add_option("--out", o->out, "Output tensor")->required();
  sub->add_option("--seed", o->seed, "Seed for uniform values in [lo, hi)");
  sub->add_option("--lo", o->lo, "Lower bound")->capture_default_str();
  sub->add_option("--hi", o->hi, "Upper bound")->capture_default_str();
  sub->add_option("--value", o->value, "Constant value");
  sub->add_option("--report", o->report, "JSON report path (default: <out>.json)");
  sub->callback([o] { run_make_tensor(*o); });
}

}  // namespace

void register_commands(CLI::App& app) {
  add_warp(app);
  add_rerp(app);
  add_rotate(app);
  add_salient(app);
  add_deform(app, Op::kDcn, "dcn", "Deformable convolution");
  add_deform(app, Op::kDcnv2, "dcnv2", "Modulated deformable convolution");
  add_deform(app, Op::kDcnv3, "dcnv3", "Grouped deformable aggregation");
  add_deform(app, Op::kDcnv4, "dcnv4", "Same expression as dcnv3");
  add_deform(app, Op::kDao, "dao", "Deformable aggregation weighted by the salient map of its output");
  add_gradcheck(app);
  add_trace(app);
  add_eval(app);
  add_sim(app);
  add_make_tensor(app);
}

}  // namespace panops::cli
