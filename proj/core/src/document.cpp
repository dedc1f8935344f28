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
#include "prosa/document.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace prosa {

using nlohmann::json;

IngestError::IngestError(std::string field, const std::string& message)
    : Error(fmt::format("{}: {}", field, message)), field_(std::move(field)) {}

bool BBox::valid() const noexcept {
  return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) &&
         std::isfinite(y1) && x0 <= x1 && y0 <= y1;
}

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::kText: return "text";
    case Category::kTitle: return "title";
    case Category::kTable: return "table";
    case Category::kFigure: return "figure";
    case Category::kEquation: return "equation";
  }
  return "text";
}

std::optional<Category> parse_canonical(std::string_view name) noexcept {
  for (Category c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

LabelFamily family_from_source(std::string_view source) noexcept {
  std::string lower(source);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "publaynet") return LabelFamily::kPubLayNet;
  if (lower == "doclaynet") return LabelFamily::kDocLayNet;
  return LabelFamily::kParser;
}

namespace {

using LabelTable = std::unordered_map<std::string_view, Category>;

const LabelTable& publaynet_labels() {
  static const LabelTable table = {
      {"Text", Category::kText},   {"List", Category::kText},
      {"Title", Category::kTitle}, {"Table", Category::kTable},
      {"Figure", Category::kFigure},
  };
  return table;
}

const LabelTable& doclaynet_labels() {
  // Text/Title/Table are the DocLayNet classes whose target is implied by
  // their name.
  static const LabelTable table = {
      {"Caption", Category::kText},        {"Footnote", Category::kText},
      {"List-item", Category::kText},      {"Text", Category::kText},
      {"Section-header", Category::kTitle}, {"Title", Category::kTitle},
      {"Picture", Category::kFigure},      {"Table", Category::kTable},
      {"Formula", Category::kEquation},
  };
  return table;
}

const LabelTable& parser_labels() {
  static const LabelTable table = {
      {"figure_caption", Category::kText}, {"table_caption", Category::kText},
      {"reference", Category::kText},      {"list", Category::kText},
      {"plain_text", Category::kText},     {"table_footnote", Category::kText},
      {"formula_caption", Category::kText}, {"index", Category::kText},
      {"normal_text", Category::kText},    {"image", Category::kFigure},
      {"formula", Category::kEquation},    {"isolate_formula", Category::kEquation},
      {"embedding", Category::kEquation},  {"isolated", Category::kEquation},
  };
  return table;
}

bool is_non_content(std::string_view raw) noexcept {
  static constexpr std::array<std::string_view, 6> kIgnored = {
      "Page-header", "Page-footer", "header", "footer", "abandon", "seal"};
  return std::find(kIgnored.begin(), kIgnored.end(), raw) != kIgnored.end();
}

}  // namespace

std::optional<Category> normalize_label(std::string_view raw,
                                        LabelFamily family) noexcept {
  if (is_non_content(raw)) return std::nullopt;
  if (auto canonical = parse_canonical(raw)) return canonical;
  const LabelTable* table = nullptr;
  switch (family) {
    case LabelFamily::kPubLayNet: table = &publaynet_labels(); break;
    case LabelFamily::kDocLayNet: table = &doclaynet_labels(); break;
    case LabelFamily::kParser: table = &parser_labels(); break;
  }
  if (auto it = table->find(raw); it != table->end()) return it->second;
  return Category::kText;
}

double iou(const BBox& a, const BBox& b) noexcept {
  const double ix = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double iy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  const double inter = (ix > 0.0 && iy > 0.0) ? ix * iy : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

namespace {

double require_number(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw IngestError(path + "." + key, "missing");
  if (!it->is_number()) throw IngestError(path + "." + key, "must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw IngestError(path + "." + key, "must be finite");
  return v;
}

struct PageHeader {
  std::string page_id;
  double width = 0.0;
  double height = 0.0;
};

PageHeader read_header(const json& doc) {
  if (!doc.is_object()) throw IngestError("$", "top level must be an object");
  PageHeader header;
  auto id = doc.find("page_id");
  if (id == doc.end()) throw IngestError("page_id", "missing");
  if (!id->is_string()) throw IngestError("page_id", "must be a string");
  header.page_id = id->get<std::string>();
  header.width = require_number(doc, "width", "$");
  header.height = require_number(doc, "height", "$");
  if (header.width <= 0.0) throw IngestError("width", "must be positive");
  if (header.height <= 0.0) throw IngestError("height", "must be positive");
  return header;
}

std::vector<LayoutElement> read_elements(const json& doc, LabelFamily family,
                                         const PageHeader& header,
                                         IngestStats* stats) {
  auto it = doc.find("elements");
  if (it == doc.end()) throw IngestError("elements", "missing");
  if (!it->is_array()) throw IngestError("elements", "must be an array");

  std::vector<LayoutElement> out;
  out.reserve(it->size());
  IngestStats local;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& e = (*it)[i];
    const std::string path = fmt::format("elements[{}]", i);
    if (!e.is_object()) throw IngestError(path, "must be an object");

    auto bb = e.find("bbox");
    if (bb == e.end()) throw IngestError(path + ".bbox", "missing");
    if (!bb->is_array() || bb->size() != 4)
      throw IngestError(path + ".bbox", "must be an array of 4 numbers");
    std::array<double, 4> v{};
    for (std::size_t k = 0; k < 4; ++k) {
      if (!(*bb)[k].is_number())
        throw IngestError(path + ".bbox", "must be an array of 4 numbers");
      v[k] = (*bb)[k].get<double>();
    }
    BBox box{v[0], v[1], v[2], v[3]};
    if (!box.valid())
      throw IngestError(path + ".bbox", "requires finite x0<=x1 and y0<=y1");

    auto cat = e.find("category");
    if (cat == e.end()) throw IngestError(path + ".category", "missing");
    if (!cat->is_string()) throw IngestError(path + ".category", "must be a string");

    std::string text;
    if (auto t = e.find("text"); t != e.end() && !t->is_null()) {
      if (!t->is_string()) throw IngestError(path + ".text", "must be a string");
      text = t->get<std::string>();
    }

    auto category = normalize_label(cat->get<std::string>(), family);
    if (!category) {
      ++local.dropped_non_content;
      continue;
    }

    BBox clamped{std::clamp(box.x0, 0.0, header.width),
                 std::clamp(box.y0, 0.0, header.height),
                 std::clamp(box.x1, 0.0, header.width),
                 std::clamp(box.y1, 0.0, header.height)};
    if (clamped != box) ++local.clamped;

    out.push_back(LayoutElement{clamped, *category, std::move(text), out.size()});
  }
  if (stats) *stats = local;
  return out;
}

json element_json(const LayoutElement& e) {
  return json{{"bbox", {e.box.x0, e.box.y0, e.box.x1, e.box.y1}},
              {"category", to_string(e.category)},
              {"text", e.text}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(path.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& err) {
    throw IngestError(path.string(), err.what());
  }
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << doc.dump(2) << '\n';
}

}  // namespace

ParseOutput parse_output_from_json(const json& doc, IngestStats* stats) {
  const PageHeader header = read_header(doc);
  ParseOutput out;
  out.page_id = header.page_id;
  out.page_width = header.width;
  out.page_height = header.height;
  out.elements = read_elements(doc, LabelFamily::kParser, header, stats);
  return out;
}

AnnotationSet annotations_from_json(const json& doc, IngestStats* stats) {
  const PageHeader header = read_header(doc);
  AnnotationSet out;
  out.page_id = header.page_id;
  out.page_width = header.width;
  out.page_height = header.height;
  if (auto src = doc.find("source"); src != doc.end()) {
    if (!src->is_string()) throw IngestError("source", "must be a string");
    out.source = src->get<std::string>();
  }
  out.elements = read_elements(doc, family_from_source(out.source), header, stats);
  return out;
}

ParseOutput load_parse_output(const std::filesystem::path& path,
                              IngestStats* stats) {
  return parse_output_from_json(read_json_file(path), stats);
}

AnnotationSet load_annotations(const std::filesystem::path& path,
                               IngestStats* stats) {
  return annotations_from_json(read_json_file(path), stats);
}

json to_json(const ParseOutput& output) {
  json elements = json::array();
  for (const auto& e : output.elements) elements.push_back(element_json(e));
  return json{{"page_id", output.page_id},
              {"width", output.page_width},
              {"height", output.page_height},
              {"elements", std::move(elements)}};
}

json to_json(const AnnotationSet& annotations) {
  json elements = json::array();
  for (const auto& e : annotations.elements) elements.push_back(element_json(e));
  return json{{"page_id", annotations.page_id},
              {"width", annotations.page_width},
              {"height", annotations.page_height},
              {"source", annotations.source},
              {"elements", std::move(elements)}};
}

void write_parse_output(const ParseOutput& output,
                        const std::filesystem::path& path) {
  write_json_file(to_json(output), path);
}

void write_annotations(const AnnotationSet& annotations,
                       const std::filesystem::path& path) {
  write_json_file(to_json(annotations), path);
}

ParseOutput as_parse_output(const AnnotationSet& annotations) {
  return ParseOutput{annotations.page_id, annotations.page_width,
                     annotations.page_height, annotations.elements};
}

std::vector<BBox> boxes_of(const std::vector<LayoutElement>& elements) {
  std::vector<BBox> out;
  out.reserve(elements.size());
  for (const auto& e : elements) out.push_back(e.box);
  return out;
}

}  // namespace prosa
