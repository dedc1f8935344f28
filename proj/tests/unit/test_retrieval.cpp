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

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "prosa/retrieval.hpp"
#include "prosa/rng.hpp"
#include "prosa/settings.hpp"

namespace prosa {
namespace {

using testing::element;
using testing::page;

ParseOutput text_page(const std::vector<std::string>& texts) {
  std::vector<LayoutElement> els;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    els.push_back(element(0, 10.0 * i, 100, 10.0 * i + 8, Category::kText, texts[i]));
  }
  return page(els);
}

Chunk chunk_of(std::string text) {
  Chunk c;
  c.text = std::move(text);
  return c;
}

TEST(Chunking, ShortPageIsOneChunk) {
  const ParseOutput p = text_page({"alpha", "", "beta"});
  EXPECT_EQ(page_text(p), "alpha\nbeta");
  const auto chunks = chunk(p);
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].text, "alpha\nbeta");
  EXPECT_EQ(chunks[0].elements, (std::vector<std::size_t>{0, 2}));
  EXPECT_TRUE(chunk(text_page({""})).empty());
}

TEST(Chunking, PrefersElementBoundaryNearTarget) {
  const ParseOutput p =
      text_page({std::string(300, 'a'), std::string(300, 'b'), std::string(300, 'c')});
  const auto chunks = chunk(p);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0].text, std::string(300, 'a'));
  EXPECT_EQ(chunks[0].elements, (std::vector<std::size_t>{0}));
  EXPECT_EQ(chunks[1].begin, 301u);
  EXPECT_EQ(chunks[1].text, std::string(300, 'b') + "\n" + std::string(300, 'c'));
  EXPECT_EQ(chunks[1].elements, (std::vector<std::size_t>{1, 2}));
}

TEST(Chunking, HardCutsOverlap) {
  std::string body;
  for (int i = 0; i < 2000; ++i) body += static_cast<char>('a' + i % 26);
  const auto chunks = chunk(text_page({body}));
  ASSERT_GE(chunks.size(), 4u);
  EXPECT_EQ(chunks[0].begin, 0u);
  EXPECT_EQ(chunks[0].end, 400u);
  for (std::size_t i = 1; i < chunks.size(); ++i) {
    EXPECT_EQ(chunks[i].begin + 80, chunks[i - 1].end) << i;
  }
  EXPECT_EQ(chunks.back().end, body.size());
}

TEST(Chunking, CutsNeverSplitUtf8) {
  std::string body = "a";
  for (int i = 0; i < 1000; ++i) body += "\xc3\xa9";
  const auto chunks = chunk(text_page({body}));
  ASSERT_GT(chunks.size(), 1u);
  for (const Chunk& c : chunks) {
    ASSERT_FALSE(c.text.empty());
    EXPECT_NE(static_cast<unsigned char>(c.text.front()) & 0xC0, 0x80);
    if (c.end < body.size()) {
      EXPECT_NE(static_cast<unsigned char>(body[c.end]) & 0xC0, 0x80);
    }
  }
}

TEST(Chunking, BoundsHoldOnRandomParses) {
  Rng rng(77);
  const ChunkOptions opt;
  for (int t = 0; t < 300; ++t) {
    std::vector<std::string> texts;
    const auto n = rng.uniform_int(1, 12);
    for (std::int64_t i = 0; i < n; ++i) {
      texts.emplace_back(static_cast<std::size_t>(rng.uniform_int(0, 900)), 'x');
    }
    const ParseOutput p = text_page(texts);
    const std::string full = page_text(p);
    const auto chunks = chunk(p, opt);
    if (full.empty()) {
      EXPECT_TRUE(chunks.empty());
      continue;
    }
    ASSERT_FALSE(chunks.empty());
    EXPECT_EQ(chunks.front().begin, 0u);
    EXPECT_EQ(chunks.back().end, full.size());
    for (const Chunk& c : chunks) {
      EXPECT_LE(c.text.size(), opt.max);
      if (chunks.size() > 1) EXPECT_GE(c.text.size(), opt.min);
      EXPECT_EQ(c.text, full.substr(c.begin, c.end - c.begin));
    }
  }
}

TEST(Tokenize, CasefoldsAndSplitsOnWhitespace) {
  EXPECT_EQ(tokenize("  Hello, World\tfoo\n"), (std::vector<std::string>{"hello,", "world", "foo"}));
  EXPECT_TRUE(tokenize("   ").empty());
}

TEST(Bm25, ToyCorpusMatchesOracle) {
  const std::vector<Chunk> chunks{chunk_of("the cat sat on the mat"), chunk_of("the dog sat"),
                                  chunk_of("a cat and a dog and a bird"), chunk_of("nothing here")};
  const Bm25Index index(chunks);
  const std::vector<std::string> query{"cat", "sat", "bird"};
  const auto scores = index.scores("cat sat bird");
  const double avg = (6.0 + 3 + 8 + 2) / 4.0;
  const std::vector<std::vector<double>> tf{{1, 1, 0}, {0, 1, 0}, {1, 0, 1}, {0, 0, 0}};
  const std::vector<double> df{2, 2, 1};
  const std::vector<double> len{6, 3, 8, 2};
  ASSERT_EQ(scores.size(), 4u);
  for (std::size_t d = 0; d < 4; ++d) {
    double expect = 0.0;
    for (std::size_t q = 0; q < 3; ++q) {
      if (tf[d][q] > 0) expect += oracle::bm25_term_score(tf[d][q], df[q], 4, len[d], avg, 1.5, 0.75);
    }
    EXPECT_NEAR(scores[d], expect, 1e-9) << d;
  }
  EXPECT_EQ(index.rank("cat sat bird", 2).size(), 2u);
  EXPECT_EQ(index.rank("cat sat bird", 10).back(), 3u);
}

TEST(Bm25, TiesRankByIndex) {
  const std::vector<Chunk> chunks{chunk_of("same words"), chunk_of("other"), chunk_of("same words")};
  const Bm25Index index(chunks);
  EXPECT_EQ(index.rank("same", 3), (std::vector<std::size_t>{0, 2, 1}));
  EXPECT_EQ(index.rank("unseen", 3), (std::vector<std::size_t>{0, 1, 2}));
}

class BagEncoder : public DenseEncoder {
 public:
  std::vector<float> embed(std::string_view text) override {
    std::vector<float> v(26, 0.0f);
    for (char c : text) {
      if (c >= 'a' && c <= 'z') v[static_cast<std::size_t>(c - 'a')] += 1.0f;
    }
    return v;
  }
};

TEST(Dense, RanksByCosine) {
  BagEncoder enc;
  const std::vector<Chunk> chunks{chunk_of("zzz"), chunk_of("abc"), chunk_of("aab")};
  EXPECT_EQ(dense_rank(enc, "abc", chunks, 2), (std::vector<std::size_t>{1, 2}));
}

TEST(Containment, NormalizedSubstring) {
  EXPECT_TRUE(contains_normalized("The Quick Fox", " quick fox "));
  EXPECT_FALSE(contains_normalized("The Quick Fox", "quick  fox"));
  EXPECT_TRUE(contains_normalized("anything", ""));
}

TEST(Metrics, MrrAndHitRates) {
  std::vector<QaOutcome> o(4);
  o[0].evidence_rank = o[0].answer_rank = 1;
  o[1].evidence_rank = o[1].answer_rank = 2;
  o[2].evidence_rank = o[2].answer_rank = 6;
  o[3].answer_missing = true;
  const RetrievalMetrics m = aggregate_metrics(o);
  EXPECT_EQ(m.n, 4u);
  EXPECT_NEAR(m.mrr_10, (1.0 + 0.5 + 1.0 / 6.0 + 0.0) / 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.answer_hit_1, 25.0);
  EXPECT_DOUBLE_EQ(m.answer_hit_5, 50.0);
  EXPECT_DOUBLE_EQ(m.recall_10, 75.0);
  EXPECT_DOUBLE_EQ(m.answer_missing, 25.0);
  EXPECT_EQ(aggregate_metrics({}).n, 0u);
}

TEST(Metrics, PageEvaluationFindsAnswers) {
  const ParseOutput p = text_page({"the first block talks about rivers", "second block mentions mountains"});
  QaPair q{"Which passage opens with \"second block mentions mountains\"?",
           "second block mentions mountains", "second block mentions mountains", "p"};
  const auto out = evaluate_page_bm25(std::vector<QaPair>{q}, p);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].answer_rank, 1u);
  EXPECT_FALSE(out[0].answer_missing);
  const auto gone = evaluate_page_bm25(std::vector<QaPair>{q}, text_page({"unrelated"}));
  EXPECT_TRUE(gone[0].answer_missing);
  EXPECT_EQ(gone[0].answer_rank, 0u);
}

TEST(Settings, KeyValueWithSections) {
  const Settings s = parse_settings(
      "# thresholds\n"
      "tau_iou = 0.2\n"
      "delta = 7\n"
      "[llm]\n"
      "model = \"my-model\"  # comment\n"
      "attempts = 5\n"
      "base_url = http://localhost:9000\n"
      "[mock]\n"
      "drop = 0.7\n");
  EXPECT_DOUBLE_EQ(s.thresholds.tau_iou, 0.2);
  EXPECT_EQ(s.thresholds.delta, 7);
  EXPECT_EQ(s.prompt.model, "my-model");
  EXPECT_EQ(s.prompt.max_attempts, 5);
  EXPECT_EQ(s.http.base_url, "http://localhost:9000");
  EXPECT_DOUBLE_EQ(s.mock.drop, 0.7);
  EXPECT_DOUBLE_EQ(s.thresholds.tau_text, 0.5);
}

TEST(Settings, JsonIsFlattened) {
  const Settings s = parse_settings(R"({"eta_occ": 0.4, "rule": {"gap_density": 1.5}, "llm": {"temperature": 0}})");
  EXPECT_DOUBLE_EQ(s.thresholds.eta_occ, 0.4);
  EXPECT_DOUBLE_EQ(s.rule.gap_density, 1.5);
  EXPECT_DOUBLE_EQ(s.prompt.temperature, 0.0);
}

TEST(Settings, ErrorsAreReported) {
  EXPECT_THROW(parse_settings("bogus = 1"), Error);
  EXPECT_THROW(parse_settings("tau_iou = high"), Error);
  EXPECT_THROW(parse_settings("no equals sign"), Error);
  EXPECT_THROW(parse_settings("[llm]\nattempts = 0"), Error);
  EXPECT_THROW(parse_settings("{\"tau_iou\": }"), Error);
  testing::TempDir dir("settings");
  std::ofstream(dir / "s.ini") << "min_spans = 3\n";
  EXPECT_EQ(load_settings(dir / "s.ini").min_spans, 3u);
  EXPECT_THROW(load_settings(dir / "missing.ini"), Error);
}

}  // namespace
}  // namespace prosa
