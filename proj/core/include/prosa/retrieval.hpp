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
// Page-internal retrieval over parse outputs: block-aware chunking, Okapi
// BM25, a dense-encoder hook, and the QA propagation metrics.

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prosa/document.hpp"
#include "prosa/synthetic.hpp"

namespace prosa {

struct ChunkOptions {
  std::size_t target = 400;
  std::size_t min = 80;
  std::size_t max = 700;
  std::size_t overlap = 80;
};

struct Chunk {
  std::string text;
  /// Indices of the elements whose text the chunk covers.
  std::vector<std::size_t> elements;
  /// Byte offsets into page_text().
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Non-empty element texts in output order, joined by newlines.
std::string page_text(const ParseOutput& parse);

/// Cuts at element boundaries in [begin + min, begin + max] closest to
/// begin + target; without one, cuts inside the block at begin + target and
/// starts the next chunk overlap bytes earlier. No cut leaves a tail shorter
/// than min. Cuts never split a UTF-8 sequence.
std::vector<Chunk> chunk(const ParseOutput& parse, const ChunkOptions& options = {});

/// Casefolded, whitespace-separated tokens.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
};

class Bm25Index {
 public:
  Bm25Index(std::span<const Chunk> chunks, Bm25Params params = {});

  std::size_t size() const noexcept { return docs_.size(); }
  /// Score of every chunk for the query.
  std::vector<double> scores(std::string_view query) const;
  /// Chunk indices by descending score, ties by index; at most k.
  std::vector<std::size_t> rank(std::string_view query, std::size_t k) const;

 private:
  struct Doc {
    std::vector<std::pair<std::string, std::size_t>> terms;  // sorted term -> count
    std::size_t length = 0;
  };
  Bm25Params params_;
  std::vector<Doc> docs_;
  std::vector<std::pair<std::string, std::size_t>> df_;  // sorted
  double avgdl_ = 0.0;
};

/// Hook for an embedding backend; none is bundled.
class DenseEncoder {
 public:
  virtual ~DenseEncoder() = default;
  virtual std::vector<float> embed(std::string_view text) = 0;
};

/// Cosine ranking, ties by index.
std::vector<std::size_t> dense_rank(DenseEncoder& encoder, std::string_view query,
                                    std::span<const Chunk> chunks, std::size_t k);

/// Normalized (strip + casefold) substring test.
bool contains_normalized(std::string_view haystack, std::string_view needle);

struct QaOutcome {
  /// 1-based rank of the first chunk containing the answer / evidence; 0 if
  /// none of the ranked chunks does.
  std::size_t answer_rank = 0;
  std::size_t evidence_rank = 0;
  bool answer_missing = false;
};

QaOutcome evaluate_qa(const QaPair& qa, const ParseOutput& parse,
                      std::span<const Chunk> chunks, std::span<const std::size_t> ranked);

struct RetrievalMetrics {
  std::size_t n = 0;
  /// Hit, recall and missing rates are percentages; MRR is in [0, 1].
  double answer_hit_1 = 0.0;
  double answer_hit_5 = 0.0;
  double answer_hit_10 = 0.0;
  double recall_1 = 0.0;
  double recall_5 = 0.0;
  double recall_10 = 0.0;
  double mrr_10 = 0.0;
  double answer_missing = 0.0;
};

RetrievalMetrics aggregate_metrics(std::span<const QaOutcome> outcomes);

/// Chunks the parse, ranks with BM25 (top 10) and scores every QA of the page.
std::vector<QaOutcome> evaluate_page_bm25(std::span<const QaPair> qa, const ParseOutput& parse,
                                          const ChunkOptions& options = {});

}  // namespace prosa
