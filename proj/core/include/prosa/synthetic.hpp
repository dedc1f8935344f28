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
// Synthetic pages with known layout and per-character glyph cells, and a
// geometry-driven mock parser whose failures follow fixed rules. The mock
// reads the glyph sidecar and the probe masks, never the pixels.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>
#include <opencv2/core.hpp>

#include "prosa/document.hpp"
#include "prosa/raster.hpp"

namespace prosa {

class SyntheticError : public Error {
 public:
  using Error::Error;
};

struct PageSpec {
  int width = 850;
  int height = 1100;
  int columns = 2;
  int blocks = 8;
  std::uint64_t seed = 42;
  int margin = 60;
  int gutter = 30;
  int cell_width = 8;
  int cell_height = 14;
  int min_block_gap = 14;
  int max_block_gap = 30;
  /// Upper bound on text lines per block.
  int max_lines = 8;
};

struct SyntheticPage {
  cv::Mat image;
  AnnotationSet annotations;
  /// glyphs[i][j] is the cell of character j of element i (UTF-8 text is
  /// ASCII here, so characters and bytes coincide).
  std::vector<std::vector<PixelRect>> glyphs;
  std::uint64_t seed = 0;
};

/// Throws SyntheticError when the blocks cannot fit the page.
SyntheticPage generate_page(const PageSpec& spec, const std::string& page_id);

nlohmann::json glyphs_to_json(const SyntheticPage& page);
std::vector<std::vector<PixelRect>> glyphs_from_json(const nlohmann::json& doc);

/// Writes <id>.png, <id>.annotations.json and <id>.glyphs.json.
void write_synthetic_page(const SyntheticPage& page, const std::filesystem::path& dir);

struct GlyphSidecar {
  AnnotationSet annotations;
  std::vector<std::vector<PixelRect>> glyphs;
};

/// Loads <stem>.annotations.json and <stem>.glyphs.json next to an image
/// path. Throws SyntheticError when either is missing.
GlyphSidecar load_sidecar(const std::filesystem::path& image_path);

struct MockParserRules {
  /// Element dropped when its occlusion ratio reaches this value.
  double drop = 0.6;
  /// text <-> title flips when the boundary band coverage exceeds this.
  double misclass = 0.5;
  int delta = 5;
};

/// Applies drop, merge, misclass and corrupt in that order. Masks may be
/// empty (zero size) for a clean page.
ParseOutput mock_parse(const GlyphSidecar& page, const Mask& support, const Mask& inject,
                       const MockParserRules& rules = {});

/// True when inject pixels inside the gap region between a and b form an
/// 8-connected path from the side touching a to the side touching b.
bool gap_bridged(const BBox& a, const BBox& b, const Mask& inject, int page_width,
                 int page_height);

struct QaPair {
  std::string question;
  std::string answer;
  std::string evidence;
  std::string page_id;
};

/// One question per text or title block whose text length lies in
/// [min_chars, max_chars]; answer and evidence are the block text.
std::vector<QaPair> template_qa(const AnnotationSet& annotations, std::size_t min_chars = 20,
                                std::size_t max_chars = 360);

nlohmann::json to_json(const QaPair& qa);
std::vector<QaPair> load_qa(const std::filesystem::path& path);
void write_qa(const std::vector<QaPair>& qa, const std::filesystem::path& path);

}  // namespace prosa
