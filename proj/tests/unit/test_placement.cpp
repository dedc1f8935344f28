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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "prosa/placement.hpp"

namespace prosa {
namespace {

cv::Mat white(int w, int h) { return cv::Mat(h, w, CV_8UC3, cv::Scalar(255, 255, 255)); }

// Brute anchor: within Chebyshev distance delta of a box outline pixel and
// not at the centre of a (2 delta + 1) window fully inside the content.
Mask brute_anchor(const std::vector<BBox>& boxes, int W, int H, int delta) {
  Mask outline(W, H);
  Mask content(W, H);
  for (const BBox& b : boxes) {
    const PixelRect r = rasterize(b, W, H);
    for (int y = r.y0; y < r.y1; ++y) {
      for (int x = r.x0; x < r.x1; ++x) {
        content.set(x, y);
        if (x == r.x0 || x == r.x1 - 1 || y == r.y0 || y == r.y1 - 1) outline.set(x, y);
      }
    }
  }
  Mask out(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      bool near = false;
      bool inside = true;
      for (int dy = -delta; dy <= delta; ++dy) {
        for (int dx = -delta; dx <= delta; ++dx) {
          const int u = x + dx;
          const int v = y + dy;
          const bool in_page = u >= 0 && v >= 0 && u < W && v < H;
          if (in_page && outline.at(u, v)) near = true;
          if (!in_page || !content.at(u, v)) inside = false;
        }
      }
      out.set(x, y, near && !inside);
    }
  }
  return out;
}

TEST(Gaps, StackedAndSideBySide) {
  const std::vector<BBox> boxes{{10, 10, 90, 40}, {10, 60, 90, 80}, {110, 10, 190, 80}};
  const auto gaps = find_gaps(boxes);
  ASSERT_EQ(gaps.size(), 3u);
  const auto stacked = std::find_if(gaps.begin(), gaps.end(),
                                    [](const Gap& g) { return g.axis == GapAxis::kStacked; });
  ASSERT_NE(stacked, gaps.end());
  EXPECT_EQ(stacked->first, 0u);
  EXPECT_EQ(stacked->second, 1u);
  EXPECT_DOUBLE_EQ(stacked->size, 20.0);
  EXPECT_EQ(stacked->region, (BBox{10, 40, 90, 60}));
  EXPECT_DOUBLE_EQ(stacked->mid_y, 50.0);
  const auto sides = std::count_if(gaps.begin(), gaps.end(),
                                   [](const Gap& g) { return g.axis == GapAxis::kSideBySide; });
  EXPECT_EQ(sides, 2);
}

TEST(Gaps, OnlyNearestNeighbourBelow) {
  const std::vector<BBox> boxes{{0, 0, 50, 10}, {0, 20, 50, 30}, {0, 40, 50, 50}};
  const auto gaps = find_gaps(boxes);
  ASSERT_EQ(gaps.size(), 2u);
  EXPECT_EQ(gaps[0].second, 1u);
  EXPECT_EQ(gaps[1].second, 2u);
}

TEST(Gaps, OverlappingBoxesHaveNone) {
  const std::vector<BBox> boxes{{0, 0, 50, 30}, {10, 20, 60, 50}};
  EXPECT_TRUE(find_gaps(boxes).empty());
}

TEST(Context, AnchorMatchesBruteOracle) {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    std::vector<BBox> boxes;
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int i = 0; i < n; ++i) {
      const double x0 = rng.uniform(0, 50);
      const double y0 = rng.uniform(0, 40);
      boxes.push_back({x0, y0, x0 + rng.uniform(1, 25), y0 + rng.uniform(1, 25)});
    }
    const int delta = static_cast<int>(rng.uniform_int(1, 5));
    const PageContext ctx(boxes, 64, 56, delta);
    EXPECT_EQ(ctx.anchor(), brute_anchor(boxes, 64, 56, delta)) << "trial " << t;
    EXPECT_EQ(ctx.content(), union_of_boxes(boxes, 64, 56));
  }
}

TEST(Context, SamplesStayInsideRegions) {
  const std::vector<BBox> boxes{{20, 20, 80, 60}, {20, 100, 180, 180}};
  const PageContext ctx(boxes, 200, 200);
  Rng rng(5);
  bool upper = false;
  bool lower = false;
  for (int i = 0; i < 500; ++i) {
    const auto a = ctx.sample_anchor(rng);
    ASSERT_TRUE(a);
    EXPECT_TRUE(ctx.anchor().at(a->x, a->y));
    const auto c = ctx.sample_content(rng);
    ASSERT_TRUE(c);
    EXPECT_TRUE(ctx.content().at(c->x, c->y));
    (c->y < 80 ? upper : lower) = true;
  }
  EXPECT_TRUE(upper && lower);
}

TEST(Placement, BridgeUsesGapMidpoint) {
  const std::vector<BBox> boxes{{10, 10, 90, 40}, {10, 60, 90, 80}};
  const PageContext ctx(boxes, 100, 100);
  ProbeConfig c = default_config(ProbeId::kP5);
  c.placement = Placement::kBridge;
  Rng rng(1);
  const PlacementResult r = place_probe(c, ctx, rng);
  EXPECT_FALSE(r.fallback);
  EXPECT_EQ(r.used, Placement::kBridge);
  ASSERT_TRUE(r.gap);
  EXPECT_EQ(r.pose, (Pose{50, 50}));
}

TEST(Placement, MissingRegionFallsBackToRandom) {
  const std::vector<BBox> one{{10, 10, 90, 40}};
  const PageContext ctx(one, 100, 100);
  ProbeConfig c = default_config(ProbeId::kP5);
  c.placement = Placement::kBridge;
  Rng rng(1);
  const PlacementResult r = place_probe(c, ctx, rng);
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(r.requested, Placement::kBridge);
  EXPECT_EQ(r.used, Placement::kRandom);

  const PageContext empty(std::vector<BBox>{}, 100, 100);
  c.placement = Placement::kContent;
  EXPECT_TRUE(place_probe(c, empty, rng).fallback);
  c.placement = Placement::kRandom;
  EXPECT_FALSE(place_probe(c, empty, rng).fallback);
}

TEST(Placement, WhitespaceRectKeepsClearance) {
  const std::vector<BBox> boxes{{0, 0, 200, 120}, {0, 150, 90, 200}};
  const PageContext ctx(boxes, 200, 200);
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const auto pose = place_in_whitespace(ctx, 40, 10, 5, rng);
    ASSERT_TRUE(pose);
    const Mask rect = rect_support(*pose, 40, 10, 200, 200);
    EXPECT_EQ(rect.count_and(dilate(ctx.content(), 5)), 0u);
  }
  EXPECT_FALSE(place_in_whitespace(ctx, 150, 60, 5, rng));
}

TEST(ApplyProbe, DeterministicAndLocal) {
  const std::vector<BBox> boxes{{20, 20, 180, 90}, {20, 110, 180, 180}};
  const PageContext ctx(boxes, 200, 200);
  ProbeConfig c = default_config(ProbeId::kP3);
  c.placement = Placement::kContent;
  c.r = 30;
  c.probe_count = 2;
  c.seed = 17;
  const cv::Mat img = white(200, 200);
  Rng r1(4);
  Rng r2(4);
  const PerturbResult a = apply_probe(c, img, ctx, r1);
  const PerturbResult b = apply_probe(c, img, ctx, r2);
  EXPECT_EQ(a.mask.support, b.mask.support);
  EXPECT_EQ(cv::norm(a.image, b.image, cv::NORM_INF), 0.0);
  EXPECT_EQ(a.placements.size(), 2u);
  for (int y = 0; y < 200; ++y) {
    for (int x = 0; x < 200; ++x) {
      if (!a.mask.support.at(x, y)) {
        ASSERT_EQ(a.image.at<cv::Vec3b>(y, x), cv::Vec3b(255, 255, 255));
      }
    }
  }
}

TEST(ApplyProbe, AreaBudgetDropsLaterProbes) {
  const std::vector<BBox> boxes{{20, 20, 180, 180}};
  const PageContext ctx(boxes, 200, 200);
  ProbeConfig c = default_config(ProbeId::kP4);
  c.a_area = 0.2;
  c.placement = Placement::kContent;
  c.probe_count = 3;
  Rng rng(2);
  const PerturbResult r = apply_probe(c, white(200, 200), ctx, rng, 0.21);
  EXPECT_EQ(r.placements.size() + r.budget_skipped, 3u);
  EXPECT_GE(r.placements.size(), 1u);
  EXPECT_LE(static_cast<double>(r.mask.support.count()) / (200.0 * 200.0), 0.21);
}

TEST(ApplyProbe, RejectsMismatchedContext) {
  const PageContext ctx(std::vector<BBox>{}, 100, 100);
  Rng rng(1);
  EXPECT_THROW(apply_probe(default_config(ProbeId::kP1), white(120, 100), ctx, rng), ProbeError);
}

TEST(HitFraction, CountsTouchedBoxes) {
  const std::vector<BBox> boxes{{0, 0, 10, 10}, {20, 0, 30, 10}, {40, 0, 50, 10}, {60, 0, 70, 10}};
  const Mask m = testing::rect_mask(100, 20, {5, 5, 25, 6});
  EXPECT_DOUBLE_EQ(hit_fraction(boxes, m), 0.5);
  EXPECT_DOUBLE_EQ(hit_fraction({}, m), 0.0);
}

std::vector<BBox> grid_boxes(int cols, int rows) {
  std::vector<BBox> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out.push_back({20.0 + c * 120, 20.0 + r * 90, 110.0 + c * 120, 90.0 + r * 90});
    }
  }
  return out;
}

TEST(Nt, ReachesTargetAndReportsAchieved) {
  const auto boxes = grid_boxes(4, 5);
  const PageContext ctx(boxes, 500, 480);
  const cv::Mat img = white(500, 480);
  for (double target : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
    Rng rng(21);
    const NtResult r = nt_place(target, NtOptions{}, ctx, boxes, img, 5, rng);
    EXPECT_FALSE(r.shortfall) << target;
    EXPECT_GE(r.achieved + 1e-12, target);
    EXPECT_DOUBLE_EQ(r.achieved, hit_fraction(boxes, r.mask.support));
  }
}

TEST(Nt, ShortfallIsReported) {
  const auto boxes = grid_boxes(4, 5);
  const PageContext ctx(boxes, 500, 480);
  NtOptions opt;
  opt.max_stamps = 2;
  Rng rng(21);
  const NtResult r = nt_place(1.0, opt, ctx, boxes, white(500, 480), 5, rng);
  EXPECT_TRUE(r.shortfall);
  EXPECT_LT(r.achieved, 1.0);
  EXPECT_EQ(r.stamps, 2);

  Rng rng2(1);
  EXPECT_TRUE(nt_place(0.5, {}, ctx, {}, white(500, 480), 5, rng2).shortfall);
  EXPECT_THROW(nt_place(0.0, {}, ctx, boxes, white(500, 480), 5, rng2), ProbeError);
}

TEST(Nt, SameStreamNestsAcrossTargets) {
  const auto boxes = grid_boxes(4, 5);
  const PageContext ctx(boxes, 500, 480);
  const cv::Mat img = white(500, 480);
  Mask previous(500, 480);
  for (double target : {0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 1.0}) {
    Rng rng(99);
    const NtResult r = nt_place(target, NtOptions{}, ctx, boxes, img, 99, rng);
    for (int y = 0; y < 480; ++y) {
      for (int x = 0; x < 500; ++x) {
        if (previous.at(x, y)) {
          ASSERT_TRUE(r.mask.support.at(x, y)) << target;
        }
      }
    }
    previous = r.mask.support;
  }
}

}  // namespace
}  // namespace prosa
