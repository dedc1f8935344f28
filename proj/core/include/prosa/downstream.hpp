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
// Footprint-matched downstream comparison: each QA page is parsed clean,
// under a structural bridge probe, under an erasure of the same pixel area
// placed in whitespace, and under a large content erasure. Retrieval
// metrics are reported per condition.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "prosa/adapter.hpp"
#include "prosa/audit.hpp"
#include "prosa/campaign.hpp"
#include "prosa/probe.hpp"
#include "prosa/retrieval.hpp"
#include "prosa/synthetic.hpp"

namespace prosa {

enum class Condition : std::uint8_t { kClean, kAreaMatched, kStructural, kLargeArea };

inline constexpr std::array<Condition, 4> kAllConditions = {
    Condition::kClean, Condition::kAreaMatched, Condition::kStructural, Condition::kLargeArea};

/// "clean", "AM", "Str", "LA".
std::string_view to_string(Condition c) noexcept;

/// P5 bridge line, 1 px wide, half the page width, three per page.
ProbeConfig structural_condition();
/// P4 content erasure covering 16.6% of the page.
ProbeConfig large_area_condition();

struct DownstreamOptions {
  std::uint64_t base_seed = 42;
  ProbeConfig structural = structural_condition();
  ProbeConfig large_area = large_area_condition();
  /// Minimum distance between the area-matched patch and any content box.
  int clearance = 5;
  unsigned workers = 1;
  AuditThresholds thresholds;
  ChunkOptions chunking;
};

struct DownstreamRow {
  std::string image_id;
  Condition condition = Condition::kClean;
  double tor = 0.0;
  double b_slr = 0.0;
  /// Area-matched patch found no whitespace and was placed anywhere.
  bool placement_fallback = false;
  std::vector<QaOutcome> outcomes;
};

struct ConditionSummary {
  Condition condition = Condition::kClean;
  std::size_t pages = 0;
  double mean_tor = 0.0;
  double mean_b_slr = 0.0;
  RetrievalMetrics bm25;
};

struct DownstreamResult {
  std::vector<DownstreamRow> rows;
  std::array<ConditionSummary, 4> summary;
  std::vector<SkipEntry> skips;
};

/// Pages without QA pairs are ignored. Rows are ordered by (page, condition).
DownstreamResult run_downstream(const std::vector<PoolPage>& pool, ParserAdapter& adapter,
                                const std::vector<QaPair>& qa, const DownstreamOptions& options = {});

/// condition, pages, n_qa, mean_TOR, mean_B_SLR, answer_missing, Recall@1/5/10,
/// AnswerHit@1/5/10, MRR@10.
void write_downstream_csv(std::ostream& out, const DownstreamResult& result);

}  // namespace prosa
