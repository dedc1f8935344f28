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
// Page-sized binary rasters. A box covers the half-open integer cells
// [floor(x0), ceil(x1)) x [floor(y0), ceil(y1)), clipped to the page; probe
// geometry uses the pixel-center rule. Both exposure descriptors and
// occlusion ratios count pixels through this one geometry.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prosa/document.hpp"

namespace prosa {

/// Half-open integer pixel rectangle.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 > x0 ? x1 - x0 : 0; }
  int height() const noexcept { return y1 > y0 ? y1 - y0 : 0; }
  long long area() const noexcept {
    return static_cast<long long>(width()) * height();
  }
  bool empty() const noexcept { return width() == 0 || height() == 0; }
  PixelRect clipped(int page_width, int page_height) const noexcept;
  PixelRect expanded(int d) const noexcept;
  PixelRect united(const PixelRect& other) const noexcept;

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

PixelRect rasterize(const BBox& box, int page_width, int page_height) noexcept;

class Mask {
 public:
  Mask() = default;
  Mask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return pixels_.size(); }

  bool at(int x, int y) const noexcept {
    return pixels_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool on = true) noexcept {
    pixels_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0;
  }
  std::uint8_t* row(int y) noexcept {
    return pixels_.data() + static_cast<std::size_t>(y) * width_;
  }
  const std::uint8_t* row(int y) const noexcept {
    return pixels_.data() + static_cast<std::size_t>(y) * width_;
  }
  std::span<const std::uint8_t> data() const noexcept { return pixels_; }

  void fill(PixelRect rect) noexcept;
  /// Number of set pixels.
  std::size_t count() const noexcept;
  std::size_t count(PixelRect rect) const noexcept;
  bool any() const noexcept;
  /// Tight bounding rectangle of the set pixels (empty when none).
  PixelRect bounds() const noexcept;

  Mask& operator|=(const Mask& other);
  Mask& operator&=(const Mask& other);
  /// Removes every pixel set in other.
  Mask& subtract(const Mask& other);

  std::size_t count_and(const Mask& other) const;
  bool subset_of(const Mask& other) const;
  bool same_shape(const Mask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Square (Chebyshev) structuring element of the given radius.
Mask dilate(const Mask& mask, int radius);
/// A pixel survives when its whole window lies inside the mask; pixels
/// beyond the page count as outside.
Mask erode(const Mask& mask, int radius);

Mask union_of_boxes(std::span<const BBox> boxes, int page_width, int page_height);
/// Dil(union of box boundaries, delta) minus the delta-eroded union of the
/// boxes. Used for both the anchor region and the annotated boundary support.
Mask boundary_band(std::span<const BBox> boxes, int page_width, int page_height,
                   int delta);

/// Summed-area table for O(1) rectangle counts over a fixed mask.
class MaskIntegral {
 public:
  explicit MaskIntegral(const Mask& mask);

  std::size_t count(PixelRect rect) const noexcept;
  bool any(PixelRect rect) const noexcept { return count(rect) > 0; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint32_t> sums_;  // (w+1) x (h+1)
};

}  // namespace prosa
