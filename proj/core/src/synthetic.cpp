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

#include "prosa/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <opencv2/imgproc.hpp>

#include "prosa/audit.hpp"
#include "prosa/image_io.hpp"
#include "prosa/placement.hpp"
#include "prosa/rng.hpp"
#include "prosa/text.hpp"

namespace prosa {
namespace {

constexpr std::array<std::string_view, 48> kWords = {
    "layout", "parser",  "region",  "column",  "margin", "figure",  "signal",  "matrix",
    "sample", "result",  "method",  "kernel",  "vector", "sensor",  "policy",  "border",
    "table",  "stream",  "record",  "window",  "detail", "output",  "format",  "frame",
    "page",   "block",   "token",   "field",   "value",  "index",   "graph",   "model",
    "the",    "of",      "and",     "for",     "with",   "under",   "between", "across",
    "data",   "noise",   "scale",   "range",   "trace",  "shift",   "order",   "level"};

constexpr std::array<std::string_view, 12> kEquationTokens = {
    "x", "y", "z", "a", "b", "=", "+", "-", "*", "2", "(n)", "sum"};

Category draw_category(Rng& rng) {
  const double r = rng.uniform();
  if (r < 0.65) return Category::kText;
  if (r < 0.75) return Category::kTitle;
  if (r < 0.85) return Category::kTable;
  if (r < 0.93) return Category::kFigure;
  return Category::kEquation;
}

std::string draw_word(Rng& rng, bool capital) {
  std::string w(kWords[static_cast<std::size_t>(rng.uniform_int(0, kWords.size() - 1))]);
  if (capital) w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

/// Fills lines word by word; the last line stops at a random fraction.
std::vector<std::string> draw_lines(Rng& rng, int lines, int chars_per_line, Category cat) {
  std::vector<std::string> out;
  for (int l = 0; l < lines; ++l) {
    const bool last = l + 1 == lines;
    const int limit = last ? std::max(6, static_cast<int>(chars_per_line * rng.uniform(0.3, 1.0)))
                           : chars_per_line;
    std::string line;
    while (true) {
      std::string w;
      if (cat == Category::kEquation) {
        w = kEquationTokens[static_cast<std::size_t>(rng.uniform_int(0, kEquationTokens.size() - 1))];
      } else if (cat == Category::kTable) {
        w = rng.bernoulli(0.4) ? fmt::format("{}", rng.uniform_int(1, 999)) : draw_word(rng, false);
      } else {
        w = draw_word(rng, cat == Category::kTitle);
      }
      const std::size_t need = line.empty() ? w.size() : line.size() + 1 + w.size();
      if (need > static_cast<std::size_t>(limit)) break;
      if (!line.empty()) line += ' ';
      line += w;
    }
    if (line.empty()) line = "a";
    out.push_back(std::move(line));
  }
  return out;
}

void draw_char(cv::Mat& image, char c, const PixelRect& cell, bool bold) {
  if (c == ' ') return;
  cv::putText(image, std::string(1, c), cv::Point(cell.x0, cell.y1 - 3), cv::FONT_HERSHEY_PLAIN,
              0.75, cv::Scalar(25, 25, 25), bold ? 2 : 1, cv::LINE_8);
}

PixelRect to_pixels(const BBox& b) {
  return {static_cast<int>(std::floor(b.x0)), static_cast<int>(std::floor(b.y0)),
          static_cast<int>(std::ceil(b.x1)), static_cast<int>(std::ceil(b.y1))};
}

}  // namespace

SyntheticPage generate_page(const PageSpec& spec, const std::string& page_id) {
  if (spec.columns < 1 || spec.blocks < 1 || spec.cell_width < 1 || spec.cell_height < 1) {
    throw SyntheticError("page spec needs at least one column, block and cell pixel");
  }
  const int col_width =
      (spec.width - 2 * spec.margin - (spec.columns - 1) * spec.gutter) / spec.columns;
  const int chars_per_line = col_width / spec.cell_width - 1;
  if (chars_per_line < 8) throw SyntheticError("columns too narrow for text");

  Rng rng(spec.seed);
  SyntheticPage page;
  page.seed = spec.seed;
  page.image = cv::Mat(spec.height, spec.width, CV_8UC3, cv::Scalar(255, 255, 255));
  page.annotations.page_id = page_id;
  page.annotations.page_width = spec.width;
  page.annotations.page_height = spec.height;
  page.annotations.source = "synthetic";

  for (int col = 0; col < spec.columns; ++col) {
    const int n = spec.blocks / spec.columns + (col < spec.blocks % spec.columns ? 1 : 0);
    if (n == 0) continue;
    std::vector<int> gaps(static_cast<std::size_t>(n - 1));
    for (int& g : gaps) g = static_cast<int>(rng.uniform_int(spec.min_block_gap, spec.max_block_gap));
    const int available = spec.height - 2 * spec.margin - std::accumulate(gaps.begin(), gaps.end(), 0);
    const int max_lines = std::min(spec.max_lines, available / (n * spec.cell_height));
    if (max_lines < 1) {
      throw SyntheticError(fmt::format("{} blocks do not fit a column of height {}", n, spec.height));
    }
    const int x0 = spec.margin + col * (col_width + spec.gutter);
    int y = spec.margin;
    for (int k = 0; k < n; ++k) {
      const Category cat = col == 0 && k == 0 ? Category::kTitle : draw_category(rng);
      int lines = 1;
      switch (cat) {
        case Category::kTitle: lines = static_cast<int>(rng.uniform_int(1, std::min(2, max_lines))); break;
        case Category::kEquation: lines = 1; break;
        default:
          lines = static_cast<int>(rng.uniform_int(std::min(2, max_lines), max_lines));
          break;
      }
      const int height = lines * spec.cell_height;
      LayoutElement e;
      e.box = {static_cast<double>(x0), static_cast<double>(y), static_cast<double>(x0 + col_width),
               static_cast<double>(y + height)};
      e.category = cat;
      e.source_index = page.annotations.elements.size();
      std::vector<PixelRect> cells;
      if (cat == Category::kFigure) {
        cv::rectangle(page.image, cv::Point(x0 + 4, y + 2), cv::Point(x0 + col_width - 5, y + height - 3),
                      cv::Scalar(200, 190, 180), cv::FILLED);
        for (int s = 0; s < 4; ++s) {
          const cv::Point p1(x0 + static_cast<int>(rng.uniform_int(4, col_width - 5)), y + height - 3);
          const cv::Point p2(x0 + static_cast<int>(rng.uniform_int(4, col_width - 5)), y + 2);
          cv::line(page.image, p1, p2, cv::Scalar(90, 80, 70), 2);
        }
      } else {
        const auto text_lines = draw_lines(rng, lines, chars_per_line, cat);
        for (std::size_t l = 0; l < text_lines.size(); ++l) {
          const std::string& line = text_lines[l];
          const int cy = y + static_cast<int>(l) * spec.cell_height;
          const std::size_t count = line.size() + (l + 1 < text_lines.size() ? 1 : 0);
          for (std::size_t j = 0; j < count; ++j) {
            const PixelRect cell{x0 + static_cast<int>(j) * spec.cell_width, cy,
                                 x0 + static_cast<int>(j + 1) * spec.cell_width, cy + spec.cell_height};
            const char c = j < line.size() ? line[j] : ' ';
            draw_char(page.image, c, cell, cat == Category::kTitle);
            e.text += c;
            cells.push_back(cell);
          }
        }
        if (cat == Category::kTable) {
          cv::rectangle(page.image, cv::Point(x0, y), cv::Point(x0 + col_width - 1, y + height - 1),
                        cv::Scalar(120, 120, 120), 1);
        }
      }
      page.annotations.elements.push_back(std::move(e));
      page.glyphs.push_back(std::move(cells));
      y += height + (k + 1 < n ? gaps[static_cast<std::size_t>(k)] : 0);
    }
  }
  return page;
}

nlohmann::json glyphs_to_json(const SyntheticPage& page) {
  nlohmann::json elements = nlohmann::json::array();
  for (const auto& cells : page.glyphs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const PixelRect& c : cells) arr.push_back({c.x0, c.y0, c.x1, c.y1});
    elements.push_back(std::move(arr));
  }
  return {{"page_id", page.annotations.page_id},
          {"seed", page.seed},
          {"elements", std::move(elements)}};
}

std::vector<std::vector<PixelRect>> glyphs_from_json(const nlohmann::json& doc) {
  std::vector<std::vector<PixelRect>> out;
  if (!doc.is_object() || !doc.contains("elements") || !doc["elements"].is_array()) {
    throw SyntheticError("glyph sidecar lacks an 'elements' array");
  }
  for (const auto& arr : doc["elements"]) {
    std::vector<PixelRect> cells;
    for (const auto& c : arr) {
      if (!c.is_array() || c.size() != 4) throw SyntheticError("glyph cell must have four integers");
      cells.push_back({c[0].get<int>(), c[1].get<int>(), c[2].get<int>(), c[3].get<int>()});
    }
    out.push_back(std::move(cells));
  }
  return out;
}

void write_synthetic_page(const SyntheticPage& page, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string& id = page.annotations.page_id;
  write_png(page.image, dir / (id + ".png"));
  write_annotations(page.annotations, dir / (id + ".annotations.json"));
  std::ofstream out(dir / (id + ".glyphs.json"), std::ios::binary);
  out << glyphs_to_json(page).dump();
  if (!out) throw SyntheticError(fmt::format("cannot write glyph sidecar for {}", id));
}

GlyphSidecar load_sidecar(const std::filesystem::path& image_path) {
  const auto dir = image_path.parent_path();
  const std::string stem = image_path.stem().string();
  const auto ann = dir / (stem + ".annotations.json");
  const auto gly = dir / (stem + ".glyphs.json");
  if (!std::filesystem::exists(ann) || !std::filesystem::exists(gly)) {
    throw SyntheticError(fmt::format("missing sidecar for {}", image_path.string()));
  }
  GlyphSidecar s;
  s.annotations = load_annotations(ann);
  std::ifstream in(gly, std::ios::binary);
  s.glyphs = glyphs_from_json(nlohmann::json::parse(in));
  if (s.glyphs.size() != s.annotations.elements.size()) {
    throw SyntheticError(fmt::format("glyph sidecar for {} has {} elements, annotations {}", stem,
                                     s.glyphs.size(), s.annotations.elements.size()));
  }
  return s;
}

bool gap_bridged(const BBox& a, const BBox& b, const Mask& inject, int page_width,
                 int page_height) {
  if (inject.width() == 0) return false;
  const BBox& top = a.y0 <= b.y0 ? a : b;
  const BBox& bottom = a.y0 <= b.y0 ? b : a;
  const BBox& left = a.x0 <= b.x0 ? a : b;
  const BBox& right = a.x0 <= b.x0 ? b : a;
  PixelRect region;
  bool vertical = false;
  if (bottom.y0 >= top.y1) {
    region = to_pixels({std::max(a.x0, b.x0), top.y1, std::min(a.x1, b.x1), bottom.y0});
    vertical = true;
  } else if (right.x0 >= left.x1) {
    region = to_pixels({left.x1, std::max(a.y0, b.y0), right.x0, std::min(a.y1, b.y1)});
  } else {
    return false;
  }
  region = region.clipped(page_width, page_height);
  if (region.empty()) return false;

  const int w = region.width();
  const int h = region.height();
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
  std::deque<std::pair<int, int>> queue;
  auto push = [&](int x, int y) {
    auto& s = seen[static_cast<std::size_t>(y - region.y0) * w + (x - region.x0)];
    if (s || !inject.at(x, y)) return;
    s = 1;
    queue.emplace_back(x, y);
  };
  if (vertical) {
    for (int x = region.x0; x < region.x1; ++x) push(x, region.y0);
  } else {
    for (int y = region.y0; y < region.y1; ++y) push(region.x0, y);
  }
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    if (vertical ? y == region.y1 - 1 : x == region.x1 - 1) return true;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < region.x0 || nx >= region.x1 || ny < region.y0 || ny >= region.y1) continue;
        push(nx, ny);
      }
    }
  }
  return false;
}

ParseOutput mock_parse(const GlyphSidecar& page, const Mask& support, const Mask& inject,
                       const MockParserRules& rules) {
  const AnnotationSet& ann = page.annotations;
  const int width = static_cast<int>(std::lround(ann.page_width));
  const int height = static_cast<int>(std::lround(ann.page_height));
  const bool masked = support.width() > 0;
  if (masked && (support.width() != width || support.height() != height)) {
    throw SyntheticError("mask size differs from the page");
  }
  if (inject.width() > 0 && !inject.same_shape(support)) {
    throw SyntheticError("inject mask size differs from the support");
  }
  ParseOutput out;
  out.page_id = ann.page_id;
  out.page_width = ann.page_width;
  out.page_height = ann.page_height;
  if (!masked) {
    out.elements = ann.elements;
    return out;
  }

  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < ann.elements.size(); ++i) {
    if (occlusion_ratio(ann.elements[i].box, support) < rules.drop) alive.push_back(i);
  }

  std::vector<std::size_t> parent(alive.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::vector<BBox> boxes;
  for (std::size_t i : alive) boxes.push_back(ann.elements[i].box);
  for (const Gap& g : find_gaps(boxes)) {
    if (gap_bridged(boxes[g.first], boxes[g.second], inject, width, height)) {
      const std::size_t ra = find(g.first);
      const std::size_t rb = find(g.second);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }

  const MaskIntegral integral(support);
  for (std::size_t k = 0; k < alive.size(); ++k) {
    if (find(k) != k) continue;
    LayoutElement merged = ann.elements[alive[k]];
    std::vector<std::size_t> members;
    for (std::size_t m = k; m < alive.size(); ++m) {
      if (find(m) == k) members.push_back(alive[m]);
    }
    merged.text.clear();
    for (std::size_t n = 0; n < members.size(); ++n) {
      const LayoutElement& e = ann.elements[members[n]];
      merged.box = {std::min(merged.box.x0, e.box.x0), std::min(merged.box.y0, e.box.y0),
                    std::max(merged.box.x1, e.box.x1), std::max(merged.box.y1, e.box.y1)};
      const auto& cells = page.glyphs[members[n]];
      if (cells.size() != e.text.size()) {
        throw SyntheticError(fmt::format("element {} has {} glyph cells for {} characters",
                                         members[n], cells.size(), e.text.size()));
      }
      std::string kept;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (!integral.any(cells[c].clipped(width, height))) kept += e.text[c];
      }
      if (n > 0 && !merged.text.empty() && !kept.empty()) merged.text += ' ';
      merged.text += kept;
    }

    const PixelRect outer = rasterize(merged.box, width, height).expanded(rules.delta).clipped(width, height);
    const PixelRect inner = rasterize(merged.box, width, height).expanded(-rules.delta).clipped(width, height);
    const long long band = outer.area() - inner.area();
    if (band > 0 && (merged.category == Category::kText || merged.category == Category::kTitle)) {
      const double covered = static_cast<double>(integral.count(outer)) -
                             static_cast<double>(inner.empty() ? 0 : integral.count(inner));
      if (covered / static_cast<double>(band) > rules.misclass) {
        merged.category = merged.category == Category::kText ? Category::kTitle : Category::kText;
      }
    }
    merged.source_index = out.elements.size();
    out.elements.push_back(std::move(merged));
  }
  return out;
}

std::vector<QaPair> template_qa(const AnnotationSet& annotations, std::size_t min_chars,
                                std::size_t max_chars) {
  std::vector<QaPair> out;
  for (const LayoutElement& e : annotations.elements) {
    if (e.category != Category::kText && e.category != Category::kTitle) continue;
    const std::size_t n = text::length(e.text);
    if (n < min_chars || n > max_chars) continue;
    std::string lead;
    std::size_t words = 0;
    std::size_t pos = 0;
    while (words < 4 && pos < e.text.size()) {
      const std::size_t end = std::min(e.text.find(' ', pos), e.text.size());
      if (end > pos) {
        if (!lead.empty()) lead += ' ';
        lead += e.text.substr(pos, end - pos);
        ++words;
      }
      pos = end + 1;
    }
    out.push_back({fmt::format("Which passage opens with \"{}\"?", lead), e.text, e.text,
                   annotations.page_id});
  }
  return out;
}

nlohmann::json to_json(const QaPair& qa) {
  return {{"question", qa.question},
          {"answer", qa.answer},
          {"evidence", qa.evidence},
          {"page_id", qa.page_id}};
}

std::vector<QaPair> load_qa(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open QA file {}", path.string()));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("QA file {} is not valid JSON: {}", path.string(), e.what()));
  }
  if (!doc.is_array()) throw Error("QA file must hold a JSON array");
  std::vector<QaPair> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    QaPair qa;
    for (auto [key, field] : {std::pair{"question", &qa.question}, std::pair{"answer", &qa.answer},
                              std::pair{"evidence", &qa.evidence}, std::pair{"page_id", &qa.page_id}}) {
      if (!item.is_object() || !item.contains(key) || !item[key].is_string()) {
        throw Error(fmt::format("QA entry {} lacks string field '{}'", i, key));
      }
      *field = item[key].get<std::string>();
    }
    if (qa.answer.empty() || qa.evidence.empty()) {
      throw Error(fmt::format("QA entry {} has an empty answer or evidence", i));
    }
    out.push_back(std::move(qa));
  }
  return out;
}

void write_qa(const std::vector<QaPair>& qa, const std::filesystem::path& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const QaPair& q : qa) doc.push_back(to_json(q));
  std::ofstream out(path, std::ios::binary);
  out << doc.dump(2) << '\n';
  if (!out) throw Error(fmt::format("cannot write QA file {}", path.string()));
}

}  // namespace prosa
