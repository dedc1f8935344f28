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
// Structural audit of a clean/perturbed parse pair: best-IoU matching,
// LCS text similarity, B-SLR with its IoU and text channels, pathway
// attribution and exposure descriptors.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "prosa/document.hpp"
#include "prosa/raster.hpp"

namespace prosa {

struct AuditThresholds {
  double tau_iou = 0.1;
  double tau_text = 0.5;
  double eta_occ = 0.3;
  int delta = 5;
};

/// Normalized strings longer than this are truncated before the LCS.
inline constexpr std::size_t kTextSimCap = 20000;

/// Length of the longest common subsequence of two code point strings.
std::size_t lcs_length(std::u32string_view a, std::u32string_view b);

/// LCS ratio of already normalized strings: 1 when both are empty, else
/// |LCS| / max(|a|, |b|).
double text_sim_normalized(std::u32string_view a, std::u32string_view b);

struct TextSimResult {
  double value = 1.0;
  bool truncated = false;
};

/// Strips surrounding whitespace, case-folds, and compares by LCS ratio.
TextSimResult text_sim_checked(std::string_view a, std::string_view b);
inline double text_sim(std::string_view a, std::string_view b) {
  return text_sim_checked(a, b).value;
}

struct ElementMatch {
  /// Absent only when the perturbed parse is empty.
  std::optional<std::size_t> adv_index;
  double iou = 0.0;
  double text_sim = 0.0;
  bool aligned = false;
  bool truncated = false;
};

struct MatchResult {
  std::vector<ElementMatch> elements;
  /// Clean elements with positive best IoU mapped to each perturbed index.
  std::vector<std::size_t> multiplicity;
};

MatchResult match(const ParseOutput& clean, const ParseOutput& adv,
                  const AuditThresholds& thresholds = {});

struct BSlr {
  double b_slr = 0.0;
  double iou_only = 0.0;
  double text_only = 0.0;
  std::size_t total = 0;
  std::size_t failed = 0;
  std::size_t iou_failed = 0;
  std::size_t text_failed = 0;
};

/// Nullopt when the clean parse has no elements.
std::optional<BSlr> b_slr(const MatchResult& result,
                          const AuditThresholds& thresholds = {});

/// |b(e) cap A| / |b(e)| over rasterized pixels; 0 for zero-area boxes.
double occlusion_ratio(const BBox& box, const Mask& support);

enum class Pathway : std::uint8_t { kIntact, kMiss, kMerge, kMisclass, kDegraded };

std::string_view to_string(Pathway p) noexcept;

struct PathwayAttribution {
  std::vector<Pathway> labels;
  std::vector<double> rho;
  std::size_t n_intact = 0;
  std::size_t n_miss = 0;
  std::size_t n_merge = 0;
  std::size_t n_misclass = 0;
  std::size_t n_degraded = 0;
  double slr_miss = 0.0;
  double slr_topo = 0.0;
};

PathwayAttribution attribute_pathways(const MatchResult& result,
                                      const ParseOutput& clean,
                                      const ParseOutput& adv, const Mask& support,
                                      const AuditThresholds& thresholds = {});

/// Rasterized annotation regions reused across the configs of one page.
class AnnotationGeometry {
 public:
  AnnotationGeometry(const AnnotationSet& annotations, int width, int height,
                     int delta = 5);

  const Mask& region() const noexcept { return region_; }
  const Mask& boundary() const noexcept { return boundary_; }
  const std::vector<PixelRect>& rects() const noexcept { return rects_; }

 private:
  Mask region_;
  Mask boundary_;
  std::vector<PixelRect> rects_;
};

struct ExposureDescriptors {
  double tor = 0.0;
  std::optional<double> acr;
  std::optional<double> bpo;
  std::optional<double> boc;
  double eir = 0.0;
};

/// annotations may be null; ACR, BPO and BOC are then absent.
ExposureDescriptors exposure(const Mask& support, const AnnotationGeometry* annotations,
                             const ParseOutput& clean);
ExposureDescriptors exposure(const Mask& support, const AnnotationSet* annotations,
                             const ParseOutput& clean, int delta = 5);

}  // namespace prosa
