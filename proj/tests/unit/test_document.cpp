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

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "prosa/document.hpp"

namespace prosa {
namespace {

using nlohmann::json;

TEST(Labels, PubLayNetNamesMapToCanonical) {
  EXPECT_EQ(normalize_label("Text", LabelFamily::kPubLayNet), Category::kText);
  EXPECT_EQ(normalize_label("Title", LabelFamily::kPubLayNet), Category::kTitle);
  EXPECT_EQ(normalize_label("List", LabelFamily::kPubLayNet), Category::kText);
  EXPECT_EQ(normalize_label("Table", LabelFamily::kPubLayNet), Category::kTable);
  EXPECT_EQ(normalize_label("Figure", LabelFamily::kPubLayNet), Category::kFigure);
}

TEST(Labels, DocLayNetHeadersAreNonContent) {
  EXPECT_EQ(normalize_label("Page-header", LabelFamily::kDocLayNet), std::nullopt);
  EXPECT_EQ(normalize_label("Page-footer", LabelFamily::kDocLayNet), std::nullopt);
  EXPECT_EQ(normalize_label("Formula", LabelFamily::kDocLayNet), Category::kEquation);
  EXPECT_EQ(normalize_label("Section-header", LabelFamily::kDocLayNet), Category::kTitle);
  EXPECT_EQ(normalize_label("Picture", LabelFamily::kDocLayNet), Category::kFigure);
}

TEST(Labels, ParserLabels) {
  EXPECT_EQ(normalize_label("plain_text", LabelFamily::kParser), Category::kText);
  EXPECT_EQ(normalize_label("image", LabelFamily::kParser), Category::kFigure);
  EXPECT_EQ(normalize_label("abandon", LabelFamily::kParser), std::nullopt);
  EXPECT_EQ(normalize_label("never_seen_label", LabelFamily::kParser), Category::kText);
}

TEST(Labels, FamilyFromSource) {
  EXPECT_EQ(family_from_source("PubLayNet"), LabelFamily::kPubLayNet);
  EXPECT_EQ(family_from_source("doclaynet"), LabelFamily::kDocLayNet);
  EXPECT_EQ(family_from_source("mineru"), LabelFamily::kParser);
}

TEST(Iou, KnownValues) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 0, 15, 10}), 50.0 / 150.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {20, 20, 30, 30}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
}

TEST(Iou, MatchesPixelCountOnIntegerBoxes) {
  const BBox boxes[] = {{0, 0, 10, 10}, {3, 4, 12, 9}, {5, 5, 6, 20}, {0, 8, 20, 12}};
  for (const auto& a : boxes) {
    for (const auto& b : boxes) {
      EXPECT_NEAR(iou(a, b), oracle::pixel_iou(a, b, 30, 30), 1e-12);
    }
  }
}

TEST(Ingest, RoundTripParseOutput) {
  const auto p = testing::page({testing::element(1, 2, 30, 40, Category::kTitle, "Héllo"),
                                testing::element(0, 50, 100, 90, Category::kTable, "")});
  const auto back = parse_output_from_json(to_json(p));
  EXPECT_EQ(back, p);
}

TEST(Ingest, MissingFieldIsNamed) {
  json doc = {{"page_id", "x"}, {"width", 10}, {"height", 10},
              {"elements", json::array({{{"category", "text"}}})}};
  try {
    parse_output_from_json(doc);
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_EQ(e.field(), "elements[0].bbox");
  }
}

TEST(Ingest, BadBoxIsRejected) {
  json doc = {{"page_id", "x"}, {"width", 10}, {"height", 10},
              {"elements", json::array({{{"bbox", {5, 5, 1, 9}}, {"category", "text"}}})}};
  EXPECT_THROW(parse_output_from_json(doc), IngestError);
  doc["elements"][0]["bbox"] = {1, 2, 3};
  EXPECT_THROW(parse_output_from_json(doc), IngestError);
}

TEST(Ingest, ClampsAndDropsWithStats) {
  json doc = {{"page_id", "x"},
              {"width", 100},
              {"height", 100},
              {"source", "doclaynet"},
              {"elements", json::array({{{"bbox", {-5, 0, 50, 120}}, {"category", "Text"}},
                                        {{"bbox", {0, 0, 10, 10}}, {"category", "Page-header"}},
                                        {{"bbox", {0, 0, 10, 10}}, {"category", "Table"}}})}};
  IngestStats stats;
  const AnnotationSet a = annotations_from_json(doc, &stats);
  ASSERT_EQ(a.elements.size(), 2u);
  EXPECT_EQ(stats.clamped, 1u);
  EXPECT_EQ(stats.dropped_non_content, 1u);
  EXPECT_EQ(a.elements[0].box, (BBox{0, 0, 50, 100}));
  EXPECT_EQ(a.elements[1].category, Category::kTable);
  EXPECT_EQ(a.elements[1].source_index, 1u);
}

TEST(Ingest, FileRoundTrip) {
  testing::TempDir dir("doc");
  const auto a = testing::annotations({testing::element(1, 1, 20, 20, Category::kFigure)});
  write_annotations(a, dir / "a.json");
  EXPECT_EQ(load_annotations(dir / "a.json"), a);
  EXPECT_THROW(load_parse_output(dir / "missing.json"), IngestError);
}

}  // namespace
}  // namespace prosa
