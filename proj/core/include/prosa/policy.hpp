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
// Policy families mapping page context to a probe config: random, rule,
// and three prompted variants (structure-hinted text, coordinate-only text,
// image-only). All of them emit configs from the same probe schema.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>
#include <opencv2/core.hpp>

#include "prosa/chat_client.hpp"
#include "prosa/document.hpp"
#include "prosa/placement.hpp"
#include "prosa/probe.hpp"
#include "prosa/rng.hpp"

namespace prosa {

class PolicyError : public Error {
 public:
  using Error::Error;
};

struct PolicyBlock {
  BBox box;
  Category category = Category::kText;
};

struct PolicyContext {
  int width = 0;
  int height = 0;
  double gray_mean = 0.0;
  double gray_std = 0.0;
  double gray_skew = 0.0;
  double edge_density = 0.0;
  std::size_t block_count = 0;
  double category_entropy = 0.0;
  double mean_area_fraction = 0.0;
  double std_area_fraction = 0.0;
  double max_area_fraction = 0.0;
  /// Gaps per 1000 px of page height.
  double gap_density = 0.0;
  double mean_gap = 0.0;
  double mean_nn_spacing = 0.0;
  int column_count = 0;
  /// |M_anchor| / page area.
  double boundary_density = 0.0;
  std::vector<PolicyBlock> blocks;
  std::vector<Gap> gaps;
};

/// Page image (BGR) plus the clean layout; annotations are never consulted.
PolicyContext compute_policy_context(const cv::Mat& image, const ParseOutput& clean,
                                     const PageContext& page);

enum class PolicyKind : std::uint8_t { kRandom, kRule, kLlmBiased, kLlmNeutral, kVlm };

std::string_view to_string(PolicyKind k) noexcept;
std::optional<PolicyKind> parse_policy_kind(std::string_view s) noexcept;

struct PolicyDecision {
  ProbeConfig config;
  PolicyKind kind = PolicyKind::kRandom;
  std::string raw_response;
  bool strategy_fallback = false;
  bool probe_fallback = false;
  bool clamped = false;
  int attempts = 0;
};

nlohmann::json to_json(const PolicyDecision& d);

/// Uniform probe id, uniform parameters in their catalog ranges, uniform
/// placement over the four strategies.
PolicyDecision policy_random(Rng& rng);

struct RuleThresholds {
  double gap_density = 0.8;
  double boundary_density = 0.05;
};

PolicyDecision policy_rule(const PolicyContext& ctx, Rng& rng,
                           const RuleThresholds& thresholds = {});

/// Block coordinates, the gap list and candidate regions.
std::string encode_context_biased(const PolicyContext& ctx);
/// Block types and boxes only.
std::string encode_context_neutral(const PolicyContext& ctx);

/// Maps either vocabulary (bridge/anchor/content/random or
/// between/edge/inside/anywhere) to a placement.
std::optional<Placement> map_strategy_name(std::string_view name) noexcept;

struct PromptOptions {
  std::string model = "gpt-4o";
  double temperature = 0.7;
  int max_tokens = 1024;
  int max_attempts = 3;
  int image_long_edge = 1024;
  int jpeg_quality = 85;
  /// Directory with llm-biased.txt, llm-neutral.txt, vlm.txt overrides.
  std::optional<std::filesystem::path> template_dir;
};

/// Prompt template text for a prompted kind; "{context}" is substituted.
std::string prompt_template(PolicyKind kind, const PromptOptions& options = {});

nlohmann::json build_prompt_request(PolicyKind kind, const PolicyContext& ctx,
                                    const cv::Mat& image,
                                    const PromptOptions& options = {});

/// Parses one model reply. Throws PolicyError when no JSON object is found.
PolicyDecision parse_policy_response(PolicyKind kind, std::string_view reply);

/// Queries the client up to max_attempts times. Throws PolicyError with the
/// collected reasons when every attempt fails.
PolicyDecision policy_prompted(PolicyKind kind, const PolicyContext& ctx,
                               const cv::Mat& image, ChatClient& client, Rng& rng,
                               const PromptOptions& options = {});

}  // namespace prosa
