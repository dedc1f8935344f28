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

// Canonical page model shared by every stage of the audit: boxes, the five
// canonical layout categories, parse outputs and annotation sets, plus the
// JSON exchange format that parser adapters write.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace prosa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an exchange file violates the canonical schema. field() names
/// the offending JSON path, e.g. "elements[3].bbox".
class IngestError : public Error {
 public:
  IngestError(std::string field, const std::string& message);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Axis-aligned box in page pixels, origin top-left.
struct BBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const noexcept { return x1 - x0; }
  double height() const noexcept { return y1 - y0; }
  double area() const noexcept { return width() * height(); }
  /// Finite coordinates with x0 <= x1 and y0 <= y1.
  bool valid() const noexcept;

  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class Category : std::uint8_t { kText, kTitle, kTable, kFigure, kEquation };

inline constexpr std::array<Category, 5> kAllCategories = {
    Category::kText, Category::kTitle, Category::kTable, Category::kFigure,
    Category::kEquation};

std::string_view to_string(Category c) noexcept;
/// Exact lowercase canonical name only ("text", "title", ...).
std::optional<Category> parse_canonical(std::string_view name) noexcept;

/// Which label vocabulary a raw label comes from. Carried explicitly because
/// "Text" (PubLayNet) and "text" (canonical) would otherwise collide.
enum class LabelFamily : std::uint8_t { kPubLayNet, kDocLayNet, kParser };

/// "publaynet" / "doclaynet" (case-insensitive); everything else is treated
/// as parser output.
LabelFamily family_from_source(std::string_view source) noexcept;

/// Maps a raw dataset or parser label to its canonical category. Returns
/// nullopt for non-content labels (page headers/footers, abandon, seal).
/// Unseen labels fall back to text.
std::optional<Category> normalize_label(std::string_view raw,
                                        LabelFamily family) noexcept;

/// One parsed or annotated block.
struct LayoutElement {
  BBox box;
  Category category = Category::kText;
  std::string text;
  std::size_t source_index = 0;

  friend bool operator==(const LayoutElement&, const LayoutElement&) = default;
};

struct ParseOutput {
  std::string page_id;
  double page_width = 0.0;
  double page_height = 0.0;
  std::vector<LayoutElement> elements;

  friend bool operator==(const ParseOutput&, const ParseOutput&) = default;
};

struct AnnotationSet {
  std::string page_id;
  double page_width = 0.0;
  double page_height = 0.0;
  std::string source;
  std::vector<LayoutElement> elements;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

/// Side information from ingest: how many boxes were clamped into the page
/// and how many non-content elements were dropped.
struct IngestStats {
  std::size_t clamped = 0;
  std::size_t dropped_non_content = 0;
};

/// Intersection over union of two boxes; 0 when the union has no area.
double iou(const BBox& a, const BBox& b) noexcept;

ParseOutput parse_output_from_json(const nlohmann::json& doc,
                                   IngestStats* stats = nullptr);
AnnotationSet annotations_from_json(const nlohmann::json& doc,
                                    IngestStats* stats = nullptr);

ParseOutput load_parse_output(const std::filesystem::path& path,
                              IngestStats* stats = nullptr);
AnnotationSet load_annotations(const std::filesystem::path& path,
                               IngestStats* stats = nullptr);

nlohmann::json to_json(const ParseOutput& output);
nlohmann::json to_json(const AnnotationSet& annotations);

void write_parse_output(const ParseOutput& output,
                        const std::filesystem::path& path);
void write_annotations(const AnnotationSet& annotations,
                       const std::filesystem::path& path);

/// Views an annotation set as a parse output (same page, same elements).
ParseOutput as_parse_output(const AnnotationSet& annotations);

std::vector<BBox> boxes_of(const std::vector<LayoutElement>& elements);

}  // namespace prosa
