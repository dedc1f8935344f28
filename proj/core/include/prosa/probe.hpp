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
// Probe catalog P1-P9, probe configuration schema, geometry rasterization
// and alpha compositing.
//
// A probe is <geometry, appearance, behavior, placement>. Geometry is
// rendered as a page-sized binary support using the pixel-center rule: a
// pixel (x, y) is in the support iff (x + 0.5, y + 0.5) satisfies the set
// definition relative to the probe center. Line and rectangle centers are
// snapped to a pixel center for odd extents and to a pixel corner for even
// extents, so a w x h rectangle covers exactly w*h pixels.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>
#include <opencv2/core.hpp>

#include "prosa/document.hpp"
#include "prosa/raster.hpp"

namespace prosa {

class ProbeError : public Error {
 public:
  using Error::Error;
};

/// Degenerate geometry (zero width or radius) produced an empty support.
class EmptyMaskError : public ProbeError {
 public:
  using ProbeError::ProbeError;
};

enum class ProbeId : std::uint8_t { kP1 = 1, kP2, kP3, kP4, kP5, kP6, kP7, kP8, kP9 };
enum class GeometryKind : std::uint8_t { kLine, kDisk, kRect, kBlob, kPoints };
enum class Appearance : std::uint8_t { kSolid, kGradient, kRing, kTexture };
enum class Behavior : std::uint8_t { kInject, kBlend, kErase };
enum class Placement : std::uint8_t { kAnchor, kContent, kRandom, kBridge };

inline constexpr std::array<ProbeId, 9> kAllProbes = {
    ProbeId::kP1, ProbeId::kP2, ProbeId::kP3, ProbeId::kP4, ProbeId::kP5,
    ProbeId::kP6, ProbeId::kP7, ProbeId::kP8, ProbeId::kP9};
inline constexpr std::array<Placement, 4> kAllPlacements = {
    Placement::kAnchor, Placement::kContent, Placement::kRandom, Placement::kBridge};

std::string_view to_string(ProbeId id) noexcept;
std::string_view to_string(GeometryKind g) noexcept;
std::string_view to_string(Appearance a) noexcept;
std::string_view to_string(Behavior b) noexcept;
std::string_view to_string(Placement p) noexcept;

std::optional<ProbeId> parse_probe_id(std::string_view s) noexcept;
std::optional<Appearance> parse_appearance(std::string_view s) noexcept;
std::optional<Behavior> parse_behavior(std::string_view s) noexcept;
std::optional<Placement> parse_placement(std::string_view s) noexcept;

/// Tunable probe parameters, named as in the catalog.
enum class ProbeParam : std::uint8_t {
  kWidth,         // w, px
  kLengthRatio,   // l_r, fraction of page width (height for P2)
  kRadius,        // r, px (disk radius for P3, dot radius for P7)
  kAlpha,         // alpha in [0, 1]
  kAreaFraction,  // a_area, fraction of the page
  kBeta,          // intensity of erasure
  kCount,         // n, dots
  kSigma,         // sigma, px
  kBaseRadius,    // r_b, px
  kKappa,         // roughness
  kTheta,         // degrees
};

std::string_view param_name(ProbeParam p) noexcept;
std::optional<ProbeParam> parse_param(std::string_view s) noexcept;

struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
  double clamp(double v) const noexcept { return v < lo ? lo : (v > hi ? hi : v); }
};

struct CatalogEntry {
  ProbeId id;
  std::string_view description;
  GeometryKind geometry;
  Behavior behavior;
  Appearance appearance;
  std::vector<Placement> placements;
  /// Parameters the geometry reads. Those with a range are validated.
  std::vector<ProbeParam> params;
  std::vector<std::pair<ProbeParam, ParamRange>> ranges;

  std::optional<ParamRange> range(ProbeParam p) const noexcept;
};

const CatalogEntry& catalog(ProbeId id);

using Rgb = std::array<std::uint8_t, 3>;

struct ProbeConfig {
  ProbeId probe = ProbeId::kP1;
  double w = 1.0;
  double l_r = 1.0;
  double r = 30.0;
  double alpha = 1.0;
  double a_area = 0.05;
  double beta = 1.0;
  int n = 10;
  double sigma = 10.0;
  double r_b = 30.0;
  double kappa = 0.1;
  double theta = 45.0;
  Appearance appearance = Appearance::kSolid;
  Behavior behavior = Behavior::kInject;
  Placement placement = Placement::kAnchor;
  int probe_count = 1;
  std::uint64_t seed = 0;
  Rgb color{0, 0, 0};

  friend bool operator==(const ProbeConfig&, const ProbeConfig&) = default;
};

double get_param(const ProbeConfig& c, ProbeParam p) noexcept;
void set_param(ProbeConfig& c, ProbeParam p, double v) noexcept;

/// Catalog defaults for a probe: behavior, appearance, first listed placement,
/// and parameters at the midpoint of their ranges.
ProbeConfig default_config(ProbeId id);

/// Throws ProbeError naming the first parameter outside its catalog range.
void validate(const ProbeConfig& config);
/// Clamps catalog parameters and probe_count into range. Returns true when
/// anything changed.
bool clamp_to_catalog(ProbeConfig& config) noexcept;

/// Alpha used when composing: 1 for inject, beta for the P4 erasure, alpha
/// otherwise.
double effective_alpha(const ProbeConfig& config) noexcept;

nlohmann::json to_json(const ProbeConfig& config);
/// Missing keys take the catalog defaults of the given probe_id.
ProbeConfig probe_config_from_json(const nlohmann::json& doc);

/// Anchor pixel of a probe; geometry is centered on it.
struct Pose {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Binary support of one probe. Throws EmptyMaskError for degenerate
/// parameters.
Mask render_geometry(const ProbeConfig& config, Pose pose, int page_width,
                     int page_height);

// Primitive shapes. Axis-aligned lines (theta 0 or 90) and rectangles are
// shifted along each axis to stay inside the page when they fit.
Mask line_support(Pose pose, double length, double width, double theta_deg,
                  int page_width, int page_height);
Mask rect_support(Pose pose, int rect_width, int rect_height, int page_width,
                  int page_height);
Mask disk_support(Pose pose, double radius, int page_width, int page_height);
Mask blob_support(Pose pose, double base_radius, double kappa,
                  std::uint64_t seed, int page_width, int page_height);
Mask points_support(Pose pose, int count, double dot_radius, double sigma,
                    std::uint64_t seed, int page_width, int page_height);

/// Rectangle side lengths of the P4 erasure for an area fraction.
std::pair<int, int> rect_size_for_area(double a_area, int page_width,
                                       int page_height) noexcept;

/// Support, per-pixel alpha and target value q for alpha blending.
/// Invariant: alpha > 0 exactly on support pixels.
struct ProbeMask {
  Mask support;
  /// Subset of the support composed with the inject behavior.
  Mask inject;
  std::vector<float> alpha;
  cv::Mat fill;  // CV_8UC3
  PixelRect bounds;

  static ProbeMask blank(int width, int height);
  int width() const noexcept { return support.width(); }
  int height() const noexcept { return support.height(); }
  float alpha_at(int x, int y) const noexcept {
    return alpha[static_cast<std::size_t>(y) * support.width() + x];
  }
  /// Overlays a later probe: its pixels take precedence.
  void merge(const ProbeMask& later);
};

/// Renders the support and derives alpha and fill from the appearance and
/// behavior. Erase targets the median color of the 8-px ring just outside
/// the support.
ProbeMask render_probe(const ProbeConfig& config, Pose pose, const cv::Mat& image);

/// I' = (1 - alpha) I + alpha q per pixel, rounded to nearest. Pixels outside
/// the support are copied unchanged.
cv::Mat compose(const cv::Mat& image, const ProbeMask& mask);

/// 1-D periodic value noise on [0, 2pi): two octaves, range [-1, 1].
class PeriodicNoise {
 public:
  explicit PeriodicNoise(std::uint64_t seed);
  double operator()(double phi) const noexcept;

 private:
  std::array<double, 8> coarse_{};
  std::array<double, 16> fine_{};
};

}  // namespace prosa
