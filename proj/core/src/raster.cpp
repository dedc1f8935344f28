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
#include "prosa/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prosa {

PixelRect PixelRect::clipped(int page_width, int page_height) const noexcept {
  PixelRect r{std::clamp(x0, 0, page_width), std::clamp(y0, 0, page_height),
              std::clamp(x1, 0, page_width), std::clamp(y1, 0, page_height)};
  if (r.x1 < r.x0) r.x1 = r.x0;
  if (r.y1 < r.y0) r.y1 = r.y0;
  return r;
}

PixelRect PixelRect::expanded(int d) const noexcept {
  return PixelRect{x0 - d, y0 - d, x1 + d, y1 + d};
}

PixelRect PixelRect::united(const PixelRect& other) const noexcept {
  if (empty()) return other;
  if (other.empty()) return *this;
  return PixelRect{std::min(x0, other.x0), std::min(y0, other.y0),
                   std::max(x1, other.x1), std::max(y1, other.y1)};
}

PixelRect rasterize(const BBox& box, int page_width, int page_height) noexcept {
  auto lo = [](double v) { return static_cast<int>(std::floor(v)); };
  auto hi = [](double v) { return static_cast<int>(std::ceil(v)); };
  // A degenerate box covers no cells even when its edge sits mid-pixel.
  if (!(box.x1 > box.x0) || !(box.y1 > box.y0)) return PixelRect{};
  return PixelRect{lo(box.x0), lo(box.y0), hi(box.x1), hi(box.y1)}.clipped(
      page_width, page_height);
}

Mask::Mask(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative mask size");
  pixels_.assign(static_cast<std::size_t>(width) * height, 0);
}

void Mask::fill(PixelRect rect) noexcept {
  rect = rect.clipped(width_, height_);
  for (int y = rect.y0; y < rect.y1; ++y) {
    std::fill(row(y) + rect.x0, row(y) + rect.x1, std::uint8_t{1});
  }
}

std::size_t Mask::count() const noexcept {
  std::size_t n = 0;
  for (auto v : pixels_) n += v;
  return n;
}

std::size_t Mask::count(PixelRect rect) const noexcept {
  rect = rect.clipped(width_, height_);
  std::size_t n = 0;
  for (int y = rect.y0; y < rect.y1; ++y) {
    const std::uint8_t* r = row(y);
    for (int x = rect.x0; x < rect.x1; ++x) n += r[x];
  }
  return n;
}

bool Mask::any() const noexcept {
  return std::any_of(pixels_.begin(), pixels_.end(), [](auto v) { return v != 0; });
}

PixelRect Mask::bounds() const noexcept {
  PixelRect r{width_, height_, 0, 0};
  for (int y = 0; y < height_; ++y) {
    const std::uint8_t* p = row(y);
    for (int x = 0; x < width_; ++x) {
      if (p[x]) {
        r.x0 = std::min(r.x0, x);
        r.x1 = std::max(r.x1, x + 1);
        r.y0 = std::min(r.y0, y);
        r.y1 = std::max(r.y1, y + 1);
      }
    }
  }
  if (r.x1 <= r.x0) return PixelRect{};
  return r;
}

namespace {
void check_shape(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("mask dimensions differ");
}
}  // namespace

Mask& Mask::operator|=(const Mask& other) {
  check_shape(*this, other);
  for (std::size_t i = 0; i < pixels_.size(); ++i) pixels_[i] |= other.pixels_[i];
  return *this;
}

Mask& Mask::operator&=(const Mask& other) {
  check_shape(*this, other);
  for (std::size_t i = 0; i < pixels_.size(); ++i) pixels_[i] &= other.pixels_[i];
  return *this;
}

Mask& Mask::subtract(const Mask& other) {
  check_shape(*this, other);
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    if (other.pixels_[i]) pixels_[i] = 0;
  }
  return *this;
}

std::size_t Mask::count_and(const Mask& other) const {
  check_shape(*this, other);
  std::size_t n = 0;
  for (std::size_t i = 0; i < pixels_.size(); ++i) n += pixels_[i] & other.pixels_[i];
  return n;
}

bool Mask::subset_of(const Mask& other) const {
  check_shape(*this, other);
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    if (pixels_[i] && !other.pixels_[i]) return false;
  }
  return true;
}

namespace {

// Window pass along one axis. dilation: any set pixel within radius;
// erosion: every pixel within radius set (out of range counts as unset).
template <bool kErode>
void window_pass(const Mask& src, Mask& dst, int radius, bool horizontal) {
  const int w = src.width();
  const int h = src.height();
  const int lines = horizontal ? h : w;
  const int len = horizontal ? w : h;
  std::vector<int> prefix(static_cast<std::size_t>(len) + 1);
  for (int l = 0; l < lines; ++l) {
    prefix[0] = 0;
    for (int i = 0; i < len; ++i) {
      const bool v = horizontal ? src.at(i, l) : src.at(l, i);
      prefix[i + 1] = prefix[i] + (v ? 1 : 0);
    }
    for (int i = 0; i < len; ++i) {
      const int a = i - radius;
      const int b = i + radius + 1;
      const int ca = std::max(a, 0);
      const int cb = std::min(b, len);
      const int n = prefix[cb] - prefix[ca];
      bool on;
      if constexpr (kErode) {
        on = (a >= 0 && b <= len) && n == (b - a);
      } else {
        on = n > 0;
      }
      if (horizontal) {
        dst.set(i, l, on);
      } else {
        dst.set(l, i, on);
      }
    }
  }
}

}  // namespace

Mask dilate(const Mask& mask, int radius) {
  if (radius <= 0) return mask;
  Mask tmp(mask.width(), mask.height());
  Mask out(mask.width(), mask.height());
  window_pass<false>(mask, tmp, radius, true);
  window_pass<false>(tmp, out, radius, false);
  return out;
}

Mask erode(const Mask& mask, int radius) {
  if (radius <= 0) return mask;
  Mask tmp(mask.width(), mask.height());
  Mask out(mask.width(), mask.height());
  window_pass<true>(mask, tmp, radius, true);
  window_pass<true>(tmp, out, radius, false);
  return out;
}

Mask union_of_boxes(std::span<const BBox> boxes, int page_width, int page_height) {
  Mask m(page_width, page_height);
  for (const BBox& b : boxes) m.fill(rasterize(b, page_width, page_height));
  return m;
}

Mask boundary_band(std::span<const BBox> boxes, int page_width, int page_height,
                   int delta) {
  Mask edges(page_width, page_height);
  for (const BBox& b : boxes) {
    const PixelRect r = rasterize(b, page_width, page_height);
    if (r.empty()) continue;
    edges.fill(PixelRect{r.x0, r.y0, r.x1, r.y0 + 1});
    edges.fill(PixelRect{r.x0, r.y1 - 1, r.x1, r.y1});
    edges.fill(PixelRect{r.x0, r.y0, r.x0 + 1, r.y1});
    edges.fill(PixelRect{r.x1 - 1, r.y0, r.x1, r.y1});
  }
  Mask band = dilate(edges, delta);
  band.subtract(erode(union_of_boxes(boxes, page_width, page_height), delta));
  return band;
}

MaskIntegral::MaskIntegral(const Mask& mask)
    : width_(mask.width()), height_(mask.height()) {
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  sums_.assign(stride * (static_cast<std::size_t>(height_) + 1), 0);
  for (int y = 0; y < height_; ++y) {
    std::uint32_t run = 0;
    const std::uint8_t* r = mask.row(y);
    for (int x = 0; x < width_; ++x) {
      run += r[x];
      sums_[(y + 1) * stride + x + 1] = sums_[y * stride + x + 1] + run;
    }
  }
}

std::size_t MaskIntegral::count(PixelRect rect) const noexcept {
  rect = rect.clipped(width_, height_);
  if (rect.empty()) return 0;
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  return sums_[rect.y1 * stride + rect.x1] - sums_[rect.y0 * stride + rect.x1] -
         sums_[rect.y1 * stride + rect.x0] + sums_[rect.y0 * stride + rect.x0];
}

}  // namespace prosa
