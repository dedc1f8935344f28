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
// Small builders shared by the unit, integration and acceptance tests.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "prosa/document.hpp"
#include "prosa/raster.hpp"
#include "prosa/synthetic.hpp"

namespace prosa::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

LayoutElement element(double x0, double y0, double x1, double y1,
                      Category category = Category::kText, std::string text = {});

ParseOutput page(std::vector<LayoutElement> elements, double width = 200, double height = 200,
                 std::string id = "p");

AnnotationSet annotations(std::vector<LayoutElement> elements, double width = 200,
                          double height = 200, std::string id = "p");

/// Mask with the given pixel rectangle set.
Mask rect_mask(int width, int height, PixelRect rect);

/// Writes count standard synthetic pages (8 blocks, 2 columns) into dir and
/// returns them. Page i uses seed derive_seed({seed, i}).
std::vector<SyntheticPage> write_synthetic_pool(const std::filesystem::path& dir, std::size_t count,
                                                std::uint64_t seed = 42);

}  // namespace prosa::testing
