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
// Phase-1 (config matrix) and Phase-2 (policy comparison) campaigns over a
// page pool. Pages run in parallel; records come back ordered by
// (config or policy order, pool order) so reruns are byte-identical.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "prosa/adapter.hpp"
#include "prosa/audit.hpp"
#include "prosa/chat_client.hpp"
#include "prosa/config_matrix.hpp"
#include "prosa/page_audit.hpp"
#include "prosa/policy.hpp"
#include "prosa/record.hpp"

namespace prosa {

struct PoolPage {
  std::string id;
  std::filesystem::path image;
  std::optional<std::filesystem::path> annotations;
  /// Position in the sorted pool; drives the seed scheme.
  std::size_t index = 0;
};

/// Every "<id>.png" in dir (mask files excluded), sorted by id, with
/// "<id>.annotations.json" attached when present.
std::vector<PoolPage> scan_pool(const std::filesystem::path& dir);

struct SkipEntry {
  std::string image_id;
  std::string config_id;
  std::string reason;
};

struct FilteredPage {
  std::string image_id;
  std::size_t n_orig_spans = 0;
  std::string reason;
};

struct CampaignResult {
  std::vector<CampaignRecord> records;
  std::vector<SkipEntry> skips;
  std::vector<FilteredPage> filtered;
  /// One entry per attempted (image, config): the concrete probe, placements
  /// and NT outcome.
  nlohmann::json params = nlohmann::json::array();
};

using CompletedSet = std::set<std::pair<std::string, std::string>>;

/// Sees every successful audit with its image and config id. Called from
/// worker threads when workers > 1.
using AuditObserver = std::function<void(const std::string& image_id, const std::string& config_id,
                                         const DiagnosticRecord& record)>;

struct CampaignOptions {
  std::vector<ConfigSpec> configs;
  std::uint64_t base_seed = kBaseSeed;
  std::size_t min_spans = 5;
  unsigned workers = 1;
  AuditThresholds thresholds;
  double area_budget = kAreaBudget;
  /// Content-addressed clean parse cache (<sha256>.json); off when unset.
  std::optional<std::filesystem::path> clean_cache;
  /// (image_id, config_id) pairs already recorded; they are not rerun.
  CompletedSet completed;
  AuditObserver observer;
};

CampaignResult run_phase1(const std::vector<PoolPage>& pool, ParserAdapter& adapter,
                          const CampaignOptions& options);

struct Phase2Options {
  std::vector<PolicyKind> policies;
  std::uint64_t base_seed = kBaseSeed;
  std::size_t min_spans = 5;
  unsigned workers = 1;
  AuditThresholds thresholds;
  double area_budget = kAreaBudget;
  RuleThresholds rule;
  PromptOptions prompt;
  /// Required when a prompted policy is listed.
  ChatClient* client = nullptr;
  std::optional<std::filesystem::path> clean_cache;
  /// (image_id, policy) pairs already recorded.
  CompletedSet completed;
};

/// Records carry the policy name in the policy column and
/// "<probe>-<placement>" as config_id.
CampaignResult run_phase2(const std::vector<PoolPage>& pool, ParserAdapter& adapter,
                          const Phase2Options& options);

nlohmann::json to_json(const SkipEntry& s);
nlohmann::json to_json(const FilteredPage& f);
/// skips, filtered pages and parameter log in one document.
nlohmann::json campaign_log(const CampaignResult& result);

/// Pairs present in an existing record file, for resuming. Phase-2 files
/// key on the policy column.
CompletedSet completed_from_records(const std::vector<CampaignRecord>& records);

}  // namespace prosa
