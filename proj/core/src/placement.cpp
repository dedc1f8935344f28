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

#include "prosa/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

namespace prosa {
namespace {

std::vector<std::size_t> row_counts(const Mask& m) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(m.height()) + 1, 0);
  for (int y = 0; y < m.height(); ++y) {
    const std::uint8_t* r = m.row(y);
    std::size_t n = 0;
    for (int x = 0; x < m.width(); ++x) n += r[x];
    rows[y + 1] = rows[y] + n;
  }
  return rows;
}

std::optional<Pose> sample_mask(const Mask& m, const std::vector<std::size_t>& rows,
                                Rng& rng) {
  if (rows.empty() || rows.back() == 0) return std::nullopt;
  const auto k = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(rows.back()) - 1));
  const auto it = std::upper_bound(rows.begin(), rows.end(), k);
  const int y = static_cast<int>(it - rows.begin()) - 1;
  std::size_t remaining = k - rows[y];
  const std::uint8_t* r = m.row(y);
  for (int x = 0; x < m.width(); ++x) {
    if (!r[x]) continue;
    if (remaining == 0) return Pose{x, y};
    --remaining;
  }
  return std::nullopt;
}

Pose random_pose(int w, int h, Rng& rng) {
  const int x = static_cast<int>(rng.uniform_int(0, w - 1));
  const int y = static_cast<int>(rng.uniform_int(0, h - 1));
  return {x, y};
}

bool overlaps(double a0, double a1, double b0, double b1) {
  return std::min(a1, b1) > std::max(a0, b0);
}

}  // namespace

std::vector<Gap> find_gaps(std::span<const BBox> boxes) {
  std::vector<Gap> gaps;
  std::set<std::pair<std::size_t, std::size_t>> seen[2];
  const std::size_t n = boxes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const BBox& a = boxes[i];
    std::optional<std::size_t> below;
    std::optional<std::size_t> right;
    double best_below = std::numeric_limits<double>::infinity();
    double best_right = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const BBox& b = boxes[j];
      if (overlaps(a.x0, a.x1, b.x0, b.x1)) {
        const double g = b.y0 - a.y1;
        if (g > 0.0 && g < best_below) {
          best_below = g;
          below = j;
        }
      }
      if (overlaps(a.y0, a.y1, b.y0, b.y1)) {
        const double g = b.x0 - a.x1;
        if (g > 0.0 && g < best_right) {
          best_right = g;
          right = j;
        }
      }
    }
    if (below && seen[0].insert({i, *below}).second) {
      const BBox& b = boxes[*below];
      Gap g;
      g.first = i;
      g.second = *below;
      g.axis = GapAxis::kStacked;
      g.size = best_below;
      g.region = {std::max(a.x0, b.x0), a.y1, std::min(a.x1, b.x1), b.y0};
      g.mid_x = (g.region.x0 + g.region.x1) / 2.0;
      g.mid_y = (g.region.y0 + g.region.y1) / 2.0;
      gaps.push_back(g);
    }
    if (right && seen[1].insert({i, *right}).second) {
      const BBox& b = boxes[*right];
      Gap g;
      g.first = i;
      g.second = *right;
      g.axis = GapAxis::kSideBySide;
      g.size = best_right;
      g.region = {a.x1, std::max(a.y0, b.y0), b.x0, std::min(a.y1, b.y1)};
      g.mid_x = (g.region.x0 + g.region.x1) / 2.0;
      g.mid_y = (g.region.y0 + g.region.y1) / 2.0;
      gaps.push_back(g);
    }
  }
  return gaps;
}

PageContext::PageContext(std::span<const BBox> boxes, int width, int height,
                         int delta)
    : width_(width),
      height_(height),
      boxes_(boxes.begin(), boxes.end()),
      content_(union_of_boxes(boxes, width, height)),
      anchor_(boundary_band(boxes, width, height, delta)),
      gaps_(find_gaps(boxes)),
      anchor_rows_(row_counts(anchor_)),
      content_rows_(row_counts(content_)) {}

std::optional<Pose> PageContext::sample_anchor(Rng& rng) const {
  return sample_mask(anchor_, anchor_rows_, rng);
}

std::optional<Pose> PageContext::sample_content(Rng& rng) const {
  return sample_mask(content_, content_rows_, rng);
}

PageContext compute_page_context(std::span<const BBox> boxes, int width,
                                 int height, int delta) {
  return PageContext(boxes, width, height, delta);
}

PageContext compute_page_context(const ParseOutput& clean, int width, int height) {
  const auto boxes = boxes_of(clean.elements);
  return PageContext(boxes, width, height);
}

PageContext compute_page_context(const AnnotationSet& clean, int width, int height) {
  const auto boxes = boxes_of(clean.elements);
  return PageContext(boxes, width, height);
}

PlacementResult place_probe(const ProbeConfig& config, const PageContext& ctx,
                            Rng& rng) {
  PlacementResult out;
  out.requested = config.placement;
  out.used = config.placement;
  std::optional<Pose> pose;
  switch (config.placement) {
    case Placement::kAnchor:
      pose = ctx.sample_anchor(rng);
      break;
    case Placement::kContent:
      pose = ctx.sample_content(rng);
      break;
    case Placement::kBridge:
      if (!ctx.gaps().empty()) {
        const auto k = static_cast<std::size_t>(rng.uniform_int(
            0, static_cast<std::int64_t>(ctx.gaps().size()) - 1));
        const Gap& g = ctx.gaps()[k];
        const int x = std::clamp(static_cast<int>(std::floor(g.mid_x)), 0, ctx.width() - 1);
        const int y = std::clamp(static_cast<int>(std::floor(g.mid_y)), 0, ctx.height() - 1);
        pose = Pose{x, y};
        out.gap = k;
      }
      break;
    case Placement::kRandom:
      break;
  }
  if (!pose) {
    if (config.placement != Placement::kRandom) out.fallback = true;
    out.used = Placement::kRandom;
    pose = random_pose(ctx.width(), ctx.height(), rng);
  }
  out.pose = *pose;
  return out;
}

std::optional<Pose> place_in_whitespace(const PageContext& ctx, int rect_width,
                                        int rect_height, int clearance, Rng& rng) {
  const int W = ctx.width();
  const int H = ctx.height();
  if (rect_width <= 0 || rect_height <= 0 || rect_width > W || rect_height > H) {
    return std::nullopt;
  }
  const Mask blocked = clearance > 0 ? dilate(ctx.content(), clearance) : ctx.content();
  const MaskIntegral integral(blocked);
  // Top-left corners; the returned pose is the rectangle anchor used by
  // rect_support, so the rectangle is [x, x + w) x [y, y + h) after snapping.
  const int ox = rect_width / 2;
  const int oy = rect_height / 2;
  auto free_at = [&](int x, int y) {
    return !integral.any({x, y, x + rect_width, y + rect_height});
  };
  for (int attempt = 0; attempt < 2000; ++attempt) {
    const int x = static_cast<int>(rng.uniform_int(0, W - rect_width));
    const int y = static_cast<int>(rng.uniform_int(0, H - rect_height));
    if (free_at(x, y)) return Pose{x + ox, y + oy};
  }
  std::vector<Pose> candidates;
  for (int y = 0; y <= H - rect_height; y += 2) {
    for (int x = 0; x <= W - rect_width; x += 2) {
      if (free_at(x, y)) candidates.push_back({x + ox, y + oy});
    }
  }
  if (candidates.empty()) return std::nullopt;
  return candidates[static_cast<std::size_t>(rng.uniform_int(
      0, static_cast<std::int64_t>(candidates.size()) - 1))];
}

PerturbResult apply_probe(const ProbeConfig& config, const cv::Mat& image,
                          const PageContext& ctx, Rng& rng, double area_budget) {
  validate(config);
  if (image.cols != ctx.width() || image.rows != ctx.height()) {
    throw ProbeError("page context does not match image size");
  }
  PerturbResult out;
  out.mask = ProbeMask::blank(image.cols, image.rows);
  const double page_area = static_cast<double>(image.cols) * image.rows;
  for (int k = 0; k < config.probe_count; ++k) {
    ProbeConfig single = config;
    single.probe_count = 1;
    single.seed = derive_seed({config.seed, static_cast<std::uint64_t>(k)});
    const PlacementResult placed = place_probe(single, ctx, rng);
    ProbeMask pm = render_probe(single, placed.pose, image);
    if (k > 0) {
      Mask merged = out.mask.support;
      merged |= pm.support;
      if (static_cast<double>(merged.count()) / page_area > area_budget) {
        ++out.budget_skipped;
        continue;
      }
    }
    out.mask.merge(pm);
    out.placements.push_back(placed);
  }
  out.image = compose(image, out.mask);
  return out;
}

double hit_fraction(std::span<const BBox> boxes, const Mask& support) {
  if (boxes.empty()) return 0.0;
  std::size_t hits = 0;
  for (const BBox& b : boxes) {
    const PixelRect r = rasterize(b, support.width(), support.height());
    if (!r.empty() && support.count(r) > 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(boxes.size());
}

NtResult nt_place(double target, const NtOptions& options, const PageContext& ctx,
                  std::span<const BBox> elements, const cv::Mat& image,
                  std::uint64_t seed, Rng& rng) {
  if (!(target > 0.0 && target <= 1.0)) {
    throw ProbeError("NT target must lie in (0, 1]");
  }
  NtResult out;
  out.target = target;
  out.mask = ProbeMask::blank(image.cols, image.rows);
  const std::size_t n = elements.size();
  if (n == 0) {
    out.shortfall = true;
    return out;
  }
  const auto need = static_cast<std::size_t>(
      std::ceil(target * static_cast<double>(n) - 1e-9));
  std::vector<PixelRect> rects(n);
  for (std::size_t i = 0; i < n; ++i) {
    rects[i] = rasterize(elements[i], ctx.width(), ctx.height());
  }
  std::vector<bool> hit(n, false);
  std::size_t hits = 0;

  ProbeConfig stamp = default_config(ProbeId::kP3);
  stamp.r = options.radius;
  stamp.alpha = options.alpha;
  stamp.color = options.color;
  stamp.behavior = Behavior::kBlend;
  stamp.appearance = Appearance::kSolid;

  while (hits < need && out.stamps < options.max_stamps) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < n; ++i) {
      if (!hit[i] && !rects[i].empty()) open.push_back(i);
    }
    if (open.empty()) break;
    const std::size_t pick = open[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(open.size()) - 1))];
    const PixelRect& r = rects[pick];
    const Pose pose{static_cast<int>(rng.uniform_int(r.x0, r.x1 - 1)),
                    static_cast<int>(rng.uniform_int(r.y0, r.y1 - 1))};
    stamp.seed = derive_seed({seed, static_cast<std::uint64_t>(out.stamps)});
    const ProbeMask pm = render_probe(stamp, pose, image);
    out.mask.merge(pm);
    ++out.stamps;
    for (std::size_t i = 0; i < n; ++i) {
      if (hit[i] || rects[i].empty()) continue;
      const PixelRect inter{std::max(rects[i].x0, pm.bounds.x0),
                            std::max(rects[i].y0, pm.bounds.y0),
                            std::min(rects[i].x1, pm.bounds.x1),
                            std::min(rects[i].y1, pm.bounds.y1)};
      if (!inter.empty() && pm.support.count(inter) > 0) {
        hit[i] = true;
        ++hits;
      }
    }
  }
  out.achieved = static_cast<double>(hits) / static_cast<double>(n);
  out.shortfall = hits < need;
  return out;
}

}  // namespace prosa
