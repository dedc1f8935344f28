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
// Page context derived from the clean layout, placement strategies, the
// multi-probe Perturb operator and target-hit (NT) stamp placement.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <opencv2/core.hpp>

#include "prosa/document.hpp"
#include "prosa/probe.hpp"
#include "prosa/raster.hpp"
#include "prosa/rng.hpp"

namespace prosa {

inline constexpr int kBoundaryDelta = 5;
inline constexpr double kAreaBudget = 0.25;

enum class GapAxis : std::uint8_t {
  kStacked,     // second box lies below first
  kSideBySide,  // second box lies right of first
};

struct Gap {
  std::size_t first = 0;
  std::size_t second = 0;
  GapAxis axis = GapAxis::kStacked;
  double size = 0.0;
  /// Region between the two boxes over their shared extent.
  BBox region;
  double mid_x = 0.0;
  double mid_y = 0.0;
};

/// For every box: the nearest box below with horizontal overlap and the
/// nearest box to the right with vertical overlap, when separated by a
/// positive gap. Duplicate pairs are reported once.
std::vector<Gap> find_gaps(std::span<const BBox> boxes);

class PageContext {
 public:
  PageContext() = default;
  PageContext(std::span<const BBox> boxes, int width, int height,
              int delta = kBoundaryDelta);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::vector<BBox>& boxes() const noexcept { return boxes_; }
  const Mask& content() const noexcept { return content_; }
  const Mask& anchor() const noexcept { return anchor_; }
  const std::vector<Gap>& gaps() const noexcept { return gaps_; }

  /// Uniform pixel of the anchor or content region; nullopt when empty.
  std::optional<Pose> sample_anchor(Rng& rng) const;
  std::optional<Pose> sample_content(Rng& rng) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<BBox> boxes_;
  Mask content_;
  Mask anchor_;
  std::vector<Gap> gaps_;
  std::vector<std::size_t> anchor_rows_;   // cumulative counts, size h+1
  std::vector<std::size_t> content_rows_;
};

PageContext compute_page_context(std::span<const BBox> boxes, int width,
                                 int height, int delta = kBoundaryDelta);
PageContext compute_page_context(const ParseOutput& clean, int width, int height);
PageContext compute_page_context(const AnnotationSet& clean, int width, int height);

struct PlacementResult {
  Pose pose;
  Placement requested = Placement::kRandom;
  Placement used = Placement::kRandom;
  bool fallback = false;
  std::optional<std::size_t> gap;
};

/// Infeasible strategies (empty anchor or content region, no gaps) fall back
/// to random placement with the fallback flag set.
PlacementResult place_probe(const ProbeConfig& config, const PageContext& ctx,
                            Rng& rng);

/// Center for a rect_width x rect_height rectangle that stays at least
/// clearance pixels away from every content box. Nullopt when none exists.
std::optional<Pose> place_in_whitespace(const PageContext& ctx, int rect_width,
                                        int rect_height, int clearance, Rng& rng);

struct PerturbResult {
  cv::Mat image;
  ProbeMask mask;
  std::vector<PlacementResult> placements;
  /// Probes dropped because they would push the union above the area budget.
  std::size_t budget_skipped = 0;
};

/// Places and composes probe_count probes. Probe k renders with seed
/// derive_seed({config.seed, k}); later probes take precedence where they
/// overlap.
PerturbResult apply_probe(const ProbeConfig& config, const cv::Mat& image,
                          const PageContext& ctx, Rng& rng,
                          double area_budget = kAreaBudget);

struct NtOptions {
  double radius = 40.0;
  double alpha = 0.6;
  Rgb color{150, 120, 90};
  int max_stamps = 64;
};

struct NtResult {
  ProbeMask mask;
  double target = 0.0;
  double achieved = 0.0;
  int stamps = 0;
  bool shortfall = false;
};

/// Adds disk stamps centered inside uncovered elements until the fraction
/// of elements whose box intersects the mask reaches the target or the
/// stamp budget runs out.
NtResult nt_place(double target, const NtOptions& options, const PageContext& ctx,
                  std::span<const BBox> elements, const cv::Mat& image,
                  std::uint64_t seed, Rng& rng);

/// Fraction of boxes whose rasterized region contains a support pixel.
double hit_fraction(std::span<const BBox> boxes, const Mask& support);

}  // namespace prosa
