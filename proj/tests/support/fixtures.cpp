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

#include "fixtures.hpp"

#include <atomic>

#include <fmt/format.h>
#include <unistd.h>

#include "prosa/rng.hpp"

namespace prosa::testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          fmt::format("prosa-test-{}-{}-{}", tag, static_cast<long>(::getpid()), counter.fetch_add(1));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

LayoutElement element(double x0, double y0, double x1, double y1, Category category,
                      std::string text) {
  LayoutElement e;
  e.box = {x0, y0, x1, y1};
  e.category = category;
  e.text = std::move(text);
  return e;
}

ParseOutput page(std::vector<LayoutElement> elements, double width, double height, std::string id) {
  ParseOutput p;
  p.page_id = std::move(id);
  p.page_width = width;
  p.page_height = height;
  for (std::size_t i = 0; i < elements.size(); ++i) elements[i].source_index = i;
  p.elements = std::move(elements);
  return p;
}

AnnotationSet annotations(std::vector<LayoutElement> elements, double width, double height,
                          std::string id) {
  AnnotationSet a;
  a.page_id = std::move(id);
  a.page_width = width;
  a.page_height = height;
  a.source = "publaynet";
  for (std::size_t i = 0; i < elements.size(); ++i) elements[i].source_index = i;
  a.elements = std::move(elements);
  return a;
}

Mask rect_mask(int width, int height, PixelRect rect) {
  Mask m(width, height);
  m.fill(rect.clipped(width, height));
  return m;
}

std::vector<SyntheticPage> write_synthetic_pool(const std::filesystem::path& dir, std::size_t count,
                                                std::uint64_t seed) {
  std::vector<SyntheticPage> out;
  for (std::size_t i = 0; i < count; ++i) {
    PageSpec spec;
    spec.seed = derive_seed({seed, i});
    out.push_back(generate_page(spec, fmt::format("page_{:04d}", i)));
    write_synthetic_page(out.back(), dir);
  }
  return out;
}

}  // namespace prosa::testing
