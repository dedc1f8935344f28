// Copyright 2026 The ProSA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "prosa/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prosa/rng.hpp"

namespace prosa {
namespace {

using P = ProbeParam;

constexpr std::uint64_t kBlobSalt = 0xb10bULL;
constexpr std::uint64_t kPointsSalt = 0x9017ULL;
constexpr std::uint64_t kTextureSalt = 0x7e47ULL;
constexpr double kRingInner = 0.85;
constexpr int kBackgroundRing = 8;

std::vector<CatalogEntry> build_catalog() {
  std::vector<CatalogEntry> c;
  const auto A = Placement::kAnchor;
  const auto C = Placement::kContent;
  const auto R = Placement::kRandom;
  const auto B = Placement::kBridge;
  c.push_back({ProbeId::kP1, "horizontal crease", GeometryKind::kLine,
               Behavior::kInject, Appearance::kSolid, {A, C, R},
               {P::kWidth, P::kLengthRatio},
               {{P::kWidth, {1, 10}}, {P::kLengthRatio, {0.5, 1.0}}}});
  c.push_back({ProbeId::kP2, "vertical crease", GeometryKind::kLine,
               Behavior::kInject, Appearance::kSolid, {A, C, R},
               {P::kWidth, P::kLengthRatio},
               {{P::kWidth, {1, 10}}, {P::kLengthRatio, {0.5, 1.0}}}});
  c.push_back({ProbeId::kP3, "circular overlay", GeometryKind::kDisk,
               Behavior::kBlend, Appearance::kSolid, {A, C, R},
               {P::kRadius, P::kAlpha},
               {{P::kRadius, {30, 90}}, {P::kAlpha, {0.2, 1.0}}}});
  c.push_back({ProbeId::kP4, "rectangular erasure", GeometryKind::kRect,
               Behavior::kErase, Appearance::kSolid, {C, B},
               {P::kAreaFraction, P::kBeta},
               {{P::kAreaFraction, {0.03, 0.25}}, {P::kBeta, {0.2, 1.0}}}});
  c.push_back({ProbeId::kP5, "thin horizontal line", GeometryKind::kLine,
               Behavior::kInject, Appearance::kSolid, {B, C, R},
               {P::kWidth, P::kLengthRatio},
               {{P::kWidth, {1, 5}}, {P::kLengthRatio, {0.2, 0.8}}}});
  c.push_back({ProbeId::kP6, "gradient band", GeometryKind::kLine,
               Behavior::kBlend, Appearance::kGradient, {A},
               {P::kAlpha, P::kWidth, P::kLengthRatio},
               {{P::kAlpha, {0.05, 0.4}}, {P::kWidth, {2, 10}}}});
  c.push_back({ProbeId::kP7, "dot cluster", GeometryKind::kPoints,
               Behavior::kInject, Appearance::kSolid, {R},
               {P::kCount, P::kRadius, P::kSigma},
               {{P::kCount, {10, 100}}, {P::kRadius, {1, 4}}, {P::kSigma, {10, 50}}}});
  c.push_back({ProbeId::kP8, "irregular patch", GeometryKind::kBlob,
               Behavior::kBlend, Appearance::kTexture, {A},
               {P::kBaseRadius, P::kKappa, P::kAlpha},
               {{P::kBaseRadius, {30, 80}}, {P::kKappa, {0.1, 0.5}}, {P::kAlpha, {0.3, 0.7}}}});
  c.push_back({ProbeId::kP9, "diagonal crease", GeometryKind::kLine,
               Behavior::kInject, Appearance::kSolid, {A},
               {P::kTheta, P::kWidth, P::kLengthRatio},
               {{P::kTheta, {20, 70}}, {P::kWidth, {1, 6}}}});
  return c;
}

const std::vector<CatalogEntry>& catalog_table() {
  static const std::vector<CatalogEntry> table = build_catalog();
  return table;
}

Rgb default_color(ProbeId id) {
  switch (id) {
    case ProbeId::kP3: return {150, 120, 90};
    case ProbeId::kP6: return {60, 60, 60};
    case ProbeId::kP8: return {110, 90, 70};
    default: return {20, 20, 20};
  }
}

bool odd_extent(double extent) {
  return (std::llround(extent) & 1LL) != 0;
}

// Integer anchor range that keeps [c - extent/2, c + extent/2] inside
// [0, limit], where c = pose + offset.
int clamp_pose(int pose, double extent, double offset, int limit) {
  if (extent > limit) return pose;
  const int lo = static_cast<int>(std::ceil(extent / 2.0 - offset));
  const int hi = static_cast<int>(std::floor(limit - extent / 2.0 - offset));
  if (lo > hi) return pose;
  return std::clamp(pose, lo, hi);
}

void require_page(int w, int h) {
  if (w <= 0 || h <= 0) {
    throw ProbeError(fmt::format("invalid page size {}x{}", w, h));
  }
}

Mask finish(Mask m, std::string_view what) {
  if (!m.any()) {
    throw EmptyMaskError(fmt::format("{} produced an empty support", what));
  }
  return m;
}

// Disk or blob with an optional inner radius ratio (ring appearance).
Mask radial_support(Pose pose, double base_radius, double kappa,
                    std::uint64_t seed, double inner_ratio, int W, int H) {
  require_page(W, H);
  if (!(base_radius > 0.0)) throw EmptyMaskError("radius must be positive");
  Mask m(W, H);
  const bool rough = kappa != 0.0;
  const PeriodicNoise noise(seed);
  const double rmax = base_radius * (1.0 + std::abs(kappa));
  const int reach = static_cast<int>(std::ceil(rmax)) + 1;
  const int y0 = std::max(0, pose.y - reach);
  const int y1 = std::min(H - 1, pose.y + reach);
  const int x0 = std::max(0, pose.x - reach);
  const int x1 = std::min(W - 1, pose.x + reach);
  for (int y = y0; y <= y1; ++y) {
    const double dy = y - pose.y;
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - pose.x;
      const double d2 = dx * dx + dy * dy;
      double radius = base_radius;
      if (rough) {
        double phi = std::atan2(dy, dx);
        if (phi < 0.0) phi += 2.0 * std::numbers::pi;
        radius = base_radius * (1.0 + kappa * noise(phi));
      }
      if (d2 > radius * radius) continue;
      if (inner_ratio > 0.0) {
        const double inner = inner_ratio * radius;
        if (d2 < inner * inner) continue;
      }
      m.set(x, y);
    }
  }
  return m;
}

struct LineShape {
  double cx = 0.0;
  double cy = 0.0;
  double length = 0.0;
  double width = 0.0;
  double theta = 0.0;  // radians
};

// Resolves the snapped and clamped center of a line probe.
LineShape resolve_line(Pose pose, double length, double width,
                       double theta_deg, int W, int H) {
  LineShape s;
  s.length = length;
  s.width = width;
  if (theta_deg == 0.0 || theta_deg == 90.0) {
    const bool vertical = theta_deg == 90.0;
    const double ext_x = vertical ? width : length;
    const double ext_y = vertical ? length : width;
    const double off_x = odd_extent(ext_x) ? 0.5 : 0.0;
    const double off_y = odd_extent(ext_y) ? 0.5 : 0.0;
    s.cx = clamp_pose(pose.x, ext_x, off_x, W) + off_x;
    s.cy = clamp_pose(pose.y, ext_y, off_y, H) + off_y;
    s.theta = vertical ? std::numbers::pi / 2.0 : 0.0;
  } else {
    s.cx = pose.x + 0.5;
    s.cy = pose.y + 0.5;
    s.theta = theta_deg * std::numbers::pi / 180.0;
  }
  return s;
}

// Visits the pixels of a line strip with the signed perpendicular offset of
// the pixel center.
template <typename Fn>
void for_each_line_pixel(const LineShape& s, int W, int H, Fn&& fn) {
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  const bool horizontal = s.theta == 0.0;
  const bool vertical = s.theta == std::numbers::pi / 2.0;
  const double half_l = s.length / 2.0;
  const double half_w = s.width / 2.0;
  double ex = std::abs(c) * half_l + std::abs(sn) * half_w;
  double ey = std::abs(sn) * half_l + std::abs(c) * half_w;
  if (horizontal) { ex = half_l; ey = half_w; }
  if (vertical) { ex = half_w; ey = half_l; }
  const int x0 = std::max(0, static_cast<int>(std::floor(s.cx - ex)) - 1);
  const int x1 = std::min(W - 1, static_cast<int>(std::ceil(s.cx + ex)) + 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(s.cy - ey)) - 1);
  const int y1 = std::min(H - 1, static_cast<int>(std::ceil(s.cy + ey)) + 1);
  for (int y = y0; y <= y1; ++y) {
    const double dy = y + 0.5 - s.cy;
    for (int x = x0; x <= x1; ++x) {
      const double dx = x + 0.5 - s.cx;
      double along = 0.0;
      double perp = 0.0;
      if (horizontal) {
        along = dx;
        perp = dy;
      } else if (vertical) {
        along = dy;
        perp = dx;
      } else {
        along = dx * c + dy * sn;
        perp = -dx * sn + dy * c;
      }
      if (std::abs(perp) < half_w && std::abs(along) <= half_l) fn(x, y, perp);
    }
  }
}

double line_length(const ProbeConfig& cfg, int W, int H) {
  return cfg.probe == ProbeId::kP2 ? cfg.l_r * H : cfg.l_r * W;
}

double line_theta(const ProbeConfig& cfg) {
  switch (cfg.probe) {
    case ProbeId::kP2: return 90.0;
    case ProbeId::kP9: return cfg.theta;
    default: return 0.0;
  }
}

struct ShapeRaster {
  Mask support;
  std::vector<float> ramp;  // per-pixel value in (0, 1], gradient only
};

ShapeRaster shape_raster(const ProbeConfig& cfg, Pose pose, int W, int H,
                         bool want_ramp) {
  require_page(W, H);
  ShapeRaster out;
  const bool ring = cfg.appearance == Appearance::kRing;
  switch (catalog(cfg.probe).geometry) {
    case GeometryKind::kLine: {
      if (!(cfg.w > 0.0) || !(cfg.l_r > 0.0)) {
        throw EmptyMaskError("line width and length must be positive");
      }
      const LineShape s = resolve_line(pose, line_length(cfg, W, H), cfg.w,
                                       line_theta(cfg), W, H);
      out.support = Mask(W, H);
      if (want_ramp) out.ramp.assign(out.support.pixel_count(), 0.0f);
      for_each_line_pixel(s, W, H, [&](int x, int y, double perp) {
        out.support.set(x, y);
        if (want_ramp) {
          out.ramp[static_cast<std::size_t>(y) * W + x] =
              static_cast<float>((perp + s.width / 2.0) / s.width);
        }
      });
      out.support = finish(std::move(out.support), "line");
      return out;
    }
    case GeometryKind::kRect: {
      const auto [rw, rh] = rect_size_for_area(cfg.a_area, W, H);
      out.support = rect_support(pose, rw, rh, W, H);
      break;
    }
    case GeometryKind::kDisk:
      out.support = finish(radial_support(pose, cfg.r, 0.0, 0,
                                          ring ? kRingInner : 0.0, W, H),
                           "disk");
      break;
    case GeometryKind::kBlob:
      out.support = finish(
          radial_support(pose, cfg.r_b, cfg.kappa,
                         derive_seed({cfg.seed, kBlobSalt}),
                         ring ? kRingInner : 0.0, W, H),
          "blob");
      break;
    case GeometryKind::kPoints:
      out.support = points_support(pose, cfg.n, cfg.r, cfg.sigma, cfg.seed, W, H);
      break;
  }
  if (want_ramp) {
    out.ramp.assign(out.support.pixel_count(), 0.0f);
    const PixelRect b = out.support.bounds();
    for (int y = b.y0; y < b.y1; ++y) {
      for (int x = b.x0; x < b.x1; ++x) {
        if (!out.support.at(x, y)) continue;
        out.ramp[static_cast<std::size_t>(y) * W + x] =
            static_cast<float>((x - b.x0 + 0.5) / b.width());
      }
    }
  }
  return out;
}

Rgb background_median(const cv::Mat& image, const Mask& support) {
  const PixelRect b = support.bounds();
  const PixelRect outer =
      b.expanded(kBackgroundRing).clipped(support.width(), support.height());
  // Local copy of the support around its bounds, dilated by the ring width.
  Mask local(outer.width(), outer.height());
  for (int y = b.y0; y < b.y1; ++y) {
    for (int x = b.x0; x < b.x1; ++x) {
      if (support.at(x, y)) local.set(x - outer.x0, y - outer.y0);
    }
  }
  const Mask grown = dilate(local, kBackgroundRing);
  std::array<std::vector<std::uint8_t>, 3> values;
  for (int y = 0; y < outer.height(); ++y) {
    const auto* px = image.ptr<cv::Vec3b>(y + outer.y0);
    for (int x = 0; x < outer.width(); ++x) {
      if (!grown.at(x, y) || local.at(x, y)) continue;
      const cv::Vec3b& v = px[x + outer.x0];
      for (int ch = 0; ch < 3; ++ch) values[ch].push_back(v[ch]);
    }
  }
  if (values[0].empty()) return {255, 255, 255};
  Rgb bgr{};
  for (int ch = 0; ch < 3; ++ch) {
    auto& v = values[ch];
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    bgr[ch] = *mid;
  }
  return bgr;
}

double json_number(const nlohmann::json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) {
    throw ProbeError(fmt::format("field '{}' must be a number", key));
  }
  return v.get<double>();
}

}  // namespace

std::string_view to_string(ProbeId id) noexcept {
  static constexpr std::array<std::string_view, 9> names = {
      "P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8", "P9"};
  return names[static_cast<int>(id) - 1];
}

std::string_view to_string(GeometryKind g) noexcept {
  switch (g) {
    case GeometryKind::kLine: return "line";
    case GeometryKind::kDisk: return "disk";
    case GeometryKind::kRect: return "rect";
    case GeometryKind::kBlob: return "blob";
    case GeometryKind::kPoints: return "points";
  }
  return "line";
}

std::string_view to_string(Appearance a) noexcept {
  switch (a) {
    case Appearance::kSolid: return "solid";
    case Appearance::kGradient: return "gradient";
    case Appearance::kRing: return "ring";
    case Appearance::kTexture: return "texture";
  }
  return "solid";
}

std::string_view to_string(Behavior b) noexcept {
  switch (b) {
    case Behavior::kInject: return "inject";
    case Behavior::kBlend: return "blend";
    case Behavior::kErase: return "erase";
  }
  return "inject";
}

std::string_view to_string(Placement p) noexcept {
  switch (p) {
    case Placement::kAnchor: return "anchor";
    case Placement::kContent: return "content";
    case Placement::kRandom: return "random";
    case Placement::kBridge: return "bridge";
  }
  return "random";
}

std::optional<ProbeId> parse_probe_id(std::string_view s) noexcept {
  for (ProbeId id : kAllProbes) {
    if (to_string(id) == s) return id;
  }
  return std::nullopt;
}

std::optional<Appearance> parse_appearance(std::string_view s) noexcept {
  for (Appearance a : {Appearance::kSolid, Appearance::kGradient,
                       Appearance::kRing, Appearance::kTexture}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

std::optional<Behavior> parse_behavior(std::string_view s) noexcept {
  for (Behavior b : {Behavior::kInject, Behavior::kBlend, Behavior::kErase}) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

std::optional<Placement> parse_placement(std::string_view s) noexcept {
  for (Placement p : kAllPlacements) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::string_view param_name(ProbeParam p) noexcept {
  switch (p) {
    case P::kWidth: return "w";
    case P::kLengthRatio: return "l_r";
    case P::kRadius: return "r";
    case P::kAlpha: return "alpha";
    case P::kAreaFraction: return "a_area";
    case P::kBeta: return "beta";
    case P::kCount: return "n";
    case P::kSigma: return "sigma";
    case P::kBaseRadius: return "r_b";
    case P::kKappa: return "kappa";
    case P::kTheta: return "theta";
  }
  return "w";
}

std::optional<ProbeParam> parse_param(std::string_view s) noexcept {
  for (int i = 0; i <= static_cast<int>(P::kTheta); ++i) {
    const auto p = static_cast<ProbeParam>(i);
    if (param_name(p) == s) return p;
  }
  return std::nullopt;
}

std::optional<ParamRange> CatalogEntry::range(ProbeParam p) const noexcept {
  for (const auto& [param, r] : ranges) {
    if (param == p) return r;
  }
  return std::nullopt;
}

const CatalogEntry& catalog(ProbeId id) {
  const int i = static_cast<int>(id) - 1;
  if (i < 0 || i >= 9) throw ProbeError("unknown probe id");
  return catalog_table()[static_cast<std::size_t>(i)];
}

double get_param(const ProbeConfig& c, ProbeParam p) noexcept {
  switch (p) {
    case P::kWidth: return c.w;
    case P::kLengthRatio: return c.l_r;
    case P::kRadius: return c.r;
    case P::kAlpha: return c.alpha;
    case P::kAreaFraction: return c.a_area;
    case P::kBeta: return c.beta;
    case P::kCount: return c.n;
    case P::kSigma: return c.sigma;
    case P::kBaseRadius: return c.r_b;
    case P::kKappa: return c.kappa;
    case P::kTheta: return c.theta;
  }
  return 0.0;
}

void set_param(ProbeConfig& c, ProbeParam p, double v) noexcept {
  switch (p) {
    case P::kWidth: c.w = v; break;
    case P::kLengthRatio: c.l_r = v; break;
    case P::kRadius: c.r = v; break;
    case P::kAlpha: c.alpha = v; break;
    case P::kAreaFraction: c.a_area = v; break;
    case P::kBeta: c.beta = v; break;
    case P::kCount: c.n = static_cast<int>(std::lround(v)); break;
    case P::kSigma: c.sigma = v; break;
    case P::kBaseRadius: c.r_b = v; break;
    case P::kKappa: c.kappa = v; break;
    case P::kTheta: c.theta = v; break;
  }
}

ProbeConfig default_config(ProbeId id) {
  const CatalogEntry& e = catalog(id);
  ProbeConfig c;
  c.probe = id;
  c.behavior = e.behavior;
  c.appearance = e.appearance;
  c.placement = e.placements.front();
  c.color = default_color(id);
  for (const auto& [param, r] : e.ranges) set_param(c, param, (r.lo + r.hi) / 2.0);
  return c;
}

void validate(const ProbeConfig& config) {
  const CatalogEntry& e = catalog(config.probe);
  for (const auto& [param, r] : e.ranges) {
    const double v = get_param(config, param);
    if (!r.contains(v)) {
      throw ProbeError(fmt::format("field '{}' = {} outside [{}, {}] for {}",
                                   param_name(param), v, r.lo, r.hi,
                                   to_string(config.probe)));
    }
  }
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw ProbeError(fmt::format("field 'alpha' = {} outside [0, 1]", config.alpha));
  }
  if (config.probe_count < 1 || config.probe_count > 3) {
    throw ProbeError(fmt::format("field 'probe_count' = {} outside [1, 3]",
                                 config.probe_count));
  }
}

bool clamp_to_catalog(ProbeConfig& config) noexcept {
  bool changed = false;
  const CatalogEntry& e = catalog(config.probe);
  for (const auto& [param, r] : e.ranges) {
    const double v = get_param(config, param);
    const double fixed = std::isnan(v) ? r.lo : r.clamp(v);
    if (fixed != v) {
      set_param(config, param, fixed);
      changed = true;
    }
  }
  if (std::isnan(config.alpha) || config.alpha < 0.0 || config.alpha > 1.0) {
    config.alpha = std::isnan(config.alpha) ? 1.0 : std::clamp(config.alpha, 0.0, 1.0);
    changed = true;
  }
  const int pc = std::clamp(config.probe_count, 1, 3);
  if (pc != config.probe_count) {
    config.probe_count = pc;
    changed = true;
  }
  return changed;
}

double effective_alpha(const ProbeConfig& config) noexcept {
  switch (config.behavior) {
    case Behavior::kInject: return 1.0;
    case Behavior::kErase:
      return config.probe == ProbeId::kP4 ? config.beta : config.alpha;
    case Behavior::kBlend: return config.alpha;
  }
  return config.alpha;
}

nlohmann::json to_json(const ProbeConfig& config) {
  nlohmann::json doc = nlohmann::json::object();
  doc["probe_id"] = std::string(to_string(config.probe));
  for (ProbeParam p : catalog(config.probe).params) {
    if (p == P::kCount) {
      doc[std::string(param_name(p))] = config.n;
    } else {
      doc[std::string(param_name(p))] = get_param(config, p);
    }
  }
  doc["appearance"] = std::string(to_string(config.appearance));
  doc["behavior"] = std::string(to_string(config.behavior));
  doc["placement"] = std::string(to_string(config.placement));
  doc["probe_count"] = config.probe_count;
  doc["seed"] = config.seed;
  doc["color"] = {config.color[0], config.color[1], config.color[2]};
  return doc;
}

ProbeConfig probe_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ProbeError("probe config must be an object");
  if (!doc.contains("probe_id") || !doc["probe_id"].is_string()) {
    throw ProbeError("field 'probe_id' missing or not a string");
  }
  const auto id = parse_probe_id(doc["probe_id"].get<std::string>());
  if (!id) {
    throw ProbeError(fmt::format("field 'probe_id' has unknown value '{}'",
                                 doc["probe_id"].get<std::string>()));
  }
  ProbeConfig c = default_config(*id);
  for (int i = 0; i <= static_cast<int>(P::kTheta); ++i) {
    const auto p = static_cast<ProbeParam>(i);
    const std::string key(param_name(p));
    if (doc.contains(key)) set_param(c, p, json_number(doc, key.c_str()));
  }
  auto enum_field = [&](const char* key, auto parse, auto& out) {
    if (!doc.contains(key)) return;
    const auto& v = doc[key];
    if (!v.is_string()) throw ProbeError(fmt::format("field '{}' must be a string", key));
    const auto parsed = parse(v.template get<std::string>());
    if (!parsed) {
      throw ProbeError(fmt::format("field '{}' has unknown value '{}'", key,
                                   v.template get<std::string>()));
    }
    out = *parsed;
  };
  enum_field("appearance", parse_appearance, c.appearance);
  enum_field("behavior", parse_behavior, c.behavior);
  enum_field("placement", parse_placement, c.placement);
  if (doc.contains("probe_count")) {
    c.probe_count = static_cast<int>(json_number(doc, "probe_count"));
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) {
      throw ProbeError("field 'seed' must be an integer");
    }
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("color")) {
    const auto& col = doc["color"];
    if (!col.is_array() || col.size() != 3) {
      throw ProbeError("field 'color' must be [r, g, b]");
    }
    for (std::size_t i = 0; i < 3; ++i) {
      if (!col[i].is_number_integer() || col[i].get<int>() < 0 || col[i].get<int>() > 255) {
        throw ProbeError("field 'color' entries must be integers in [0, 255]");
      }
      c.color[i] = static_cast<std::uint8_t>(col[i].get<int>());
    }
  }
  return c;
}

std::pair<int, int> rect_size_for_area(double a_area, int page_width,
                                       int page_height) noexcept {
  const double side = std::sqrt(std::max(a_area, 0.0));
  const int w = static_cast<int>(std::lround(side * page_width));
  const int h = static_cast<int>(std::lround(side * page_height));
  return {std::clamp(w, 0, page_width), std::clamp(h, 0, page_height)};
}

Mask line_support(Pose pose, double length, double width, double theta_deg,
                  int page_width, int page_height) {
  require_page(page_width, page_height);
  if (!(width > 0.0) || !(length > 0.0)) {
    throw EmptyMaskError("line width and length must be positive");
  }
  const LineShape s =
      resolve_line(pose, length, width, theta_deg, page_width, page_height);
  Mask m(page_width, page_height);
  for_each_line_pixel(s, page_width, page_height,
                      [&](int x, int y, double) { m.set(x, y); });
  return finish(std::move(m), "line");
}

Mask rect_support(Pose pose, int rect_width, int rect_height, int page_width,
                  int page_height) {
  require_page(page_width, page_height);
  if (rect_width <= 0 || rect_height <= 0) {
    throw EmptyMaskError("rectangle sides must be positive");
  }
  const double off_x = (rect_width & 1) ? 0.5 : 0.0;
  const double off_y = (rect_height & 1) ? 0.5 : 0.0;
  const double cx = clamp_pose(pose.x, rect_width, off_x, page_width) + off_x;
  const double cy = clamp_pose(pose.y, rect_height, off_y, page_height) + off_y;
  const PixelRect r{static_cast<int>(std::lround(cx - rect_width / 2.0)),
                    static_cast<int>(std::lround(cy - rect_height / 2.0)),
                    static_cast<int>(std::lround(cx + rect_width / 2.0)),
                    static_cast<int>(std::lround(cy + rect_height / 2.0))};
  Mask m(page_width, page_height);
  m.fill(r.clipped(page_width, page_height));
  return finish(std::move(m), "rectangle");
}

Mask disk_support(Pose pose, double radius, int page_width, int page_height) {
  return finish(radial_support(pose, radius, 0.0, 0, 0.0, page_width, page_height),
                "disk");
}

Mask blob_support(Pose pose, double base_radius, double kappa,
                  std::uint64_t seed, int page_width, int page_height) {
  return finish(radial_support(pose, base_radius, kappa,
                               derive_seed({seed, kBlobSalt}), 0.0, page_width,
                               page_height),
                "blob");
}

Mask points_support(Pose pose, int count, double dot_radius, double sigma,
                    std::uint64_t seed, int page_width, int page_height) {
  require_page(page_width, page_height);
  if (count <= 0 || !(dot_radius > 0.0)) {
    throw EmptyMaskError("point count and dot radius must be positive");
  }
  Rng rng(derive_seed({seed, kPointsSalt}));
  Mask m(page_width, page_height);
  const int reach = static_cast<int>(std::ceil(dot_radius));
  const double r2 = dot_radius * dot_radius;
  for (int i = 0; i < count; ++i) {
    const int px = pose.x + static_cast<int>(std::lround(rng.normal(0.0, sigma)));
    const int py = pose.y + static_cast<int>(std::lround(rng.normal(0.0, sigma)));
    for (int y = std::max(0, py - reach); y <= std::min(page_height - 1, py + reach); ++y) {
      for (int x = std::max(0, px - reach); x <= std::min(page_width - 1, px + reach); ++x) {
        const double dx = x - px;
        const double dy = y - py;
        if (dx * dx + dy * dy <= r2) m.set(x, y);
      }
    }
  }
  return finish(std::move(m), "point cluster");
}

Mask render_geometry(const ProbeConfig& config, Pose pose, int page_width,
                     int page_height) {
  ProbeConfig plain = config;
  if (plain.appearance == Appearance::kRing) plain.appearance = Appearance::kSolid;
  return shape_raster(plain, pose, page_width, page_height, false).support;
}

ProbeMask ProbeMask::blank(int width, int height) {
  ProbeMask m;
  m.support = Mask(width, height);
  m.inject = Mask(width, height);
  m.alpha.assign(m.support.pixel_count(), 0.0f);
  m.fill = cv::Mat(height, width, CV_8UC3, cv::Scalar(0, 0, 0));
  return m;
}

void ProbeMask::merge(const ProbeMask& later) {
  if (!support.same_shape(later.support)) {
    throw ProbeError("cannot merge probe masks of different sizes");
  }
  const PixelRect b = later.bounds;
  const int W = support.width();
  for (int y = b.y0; y < b.y1; ++y) {
    const auto* src = later.fill.ptr<cv::Vec3b>(y);
    auto* dst = fill.ptr<cv::Vec3b>(y);
    for (int x = b.x0; x < b.x1; ++x) {
      if (!later.support.at(x, y)) continue;
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      support.set(x, y);
      alpha[i] = later.alpha[i];
      dst[x] = src[x];
      if (later.inject.at(x, y)) inject.set(x, y);
    }
  }
  bounds = bounds.empty() ? b : (b.empty() ? bounds : bounds.united(b));
}

ProbeMask render_probe(const ProbeConfig& config, Pose pose, const cv::Mat& image) {
  if (image.type() != CV_8UC3) throw ProbeError("page image must be 8-bit BGR");
  const int W = image.cols;
  const int H = image.rows;
  const bool gradient = config.appearance == Appearance::kGradient;
  ShapeRaster shape = shape_raster(config, pose, W, H, gradient);

  ProbeMask m = ProbeMask::blank(W, H);
  m.bounds = shape.support.bounds();
  m.support = std::move(shape.support);

  const double base = effective_alpha(config);
  if (!(base > 0.0)) {
    throw ProbeError(fmt::format("effective alpha of {} must be positive",
                                 to_string(config.probe)));
  }
  Rgb q{};
  if (config.behavior == Behavior::kErase) {
    q = background_median(image, m.support);
  } else {
    q = {config.color[2], config.color[1], config.color[0]};
  }
  const std::uint64_t tex_seed = derive_seed({config.seed, kTextureSalt});
  const bool inject = config.behavior == Behavior::kInject;
  for (int y = m.bounds.y0; y < m.bounds.y1; ++y) {
    auto* fill = m.fill.ptr<cv::Vec3b>(y);
    for (int x = m.bounds.x0; x < m.bounds.x1; ++x) {
      if (!m.support.at(x, y)) continue;
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      double a = base;
      if (gradient) {
        a *= shape.ramp[i];
      } else if (config.appearance == Appearance::kTexture) {
        const double u =
            static_cast<double>(mix64(tex_seed ^ i) >> 11) * 0x1.0p-53;
        a *= 0.5 + 0.5 * u;
      }
      m.alpha[i] = std::max(static_cast<float>(a), 1e-6f);
      fill[x] = cv::Vec3b(q[0], q[1], q[2]);
      if (inject) m.inject.set(x, y);
    }
  }
  return m;
}

cv::Mat compose(const cv::Mat& image, const ProbeMask& mask) {
  if (image.type() != CV_8UC3) throw ProbeError("page image must be 8-bit BGR");
  if (image.cols != mask.width() || image.rows != mask.height()) {
    throw ProbeError(fmt::format("image {}x{} does not match mask {}x{}",
                                 image.cols, image.rows, mask.width(),
                                 mask.height()));
  }
  cv::Mat out = image.clone();
  const PixelRect b = mask.bounds.clipped(mask.width(), mask.height());
  for (int y = b.y0; y < b.y1; ++y) {
    auto* dst = out.ptr<cv::Vec3b>(y);
    const auto* q = mask.fill.ptr<cv::Vec3b>(y);
    for (int x = b.x0; x < b.x1; ++x) {
      if (!mask.support.at(x, y)) continue;
      const double a = mask.alpha_at(x, y);
      for (int ch = 0; ch < 3; ++ch) {
        const double v = (1.0 - a) * dst[x][ch] + a * q[x][ch];
        dst[x][ch] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

PeriodicNoise::PeriodicNoise(std::uint64_t seed) {
  Rng rng(seed);
  for (double& v : coarse_) v = rng.uniform(-1.0, 1.0);
  for (double& v : fine_) v = rng.uniform(-1.0, 1.0);
}

double PeriodicNoise::operator()(double phi) const noexcept {
  auto sample = [phi](const auto& lattice) {
    const double n = static_cast<double>(lattice.size());
    double t = phi / (2.0 * std::numbers::pi) * n;
    t = std::fmod(t, n);
    if (t < 0.0) t += n;
    const auto i0 = static_cast<std::size_t>(t) % lattice.size();
    const std::size_t i1 = (i0 + 1) % lattice.size();
    const double f = t - std::floor(t);
    const double s = (1.0 - std::cos(f * std::numbers::pi)) / 2.0;
    return lattice[i0] * (1.0 - s) + lattice[i1] * s;
  };
  return (sample(coarse_) + 0.5 * sample(fine_)) / 1.5;
}

}  // namespace prosa
