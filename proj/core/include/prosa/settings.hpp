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
// Run settings: audit thresholds, probe budget, rule-policy constants,
// prompting parameters and mock-parser rules. Loaded from a JSON object or
// from "key = value" lines ('#' starts a comment).

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "prosa/audit.hpp"
#include "prosa/chat_client.hpp"
#include "prosa/placement.hpp"
#include "prosa/policy.hpp"
#include "prosa/synthetic.hpp"

namespace prosa {

struct Settings {
  AuditThresholds thresholds;
  double area_budget = kAreaBudget;
  std::size_t min_spans = 5;
  RuleThresholds rule;
  PromptOptions prompt;
  HttpClientOptions http;
  MockParserRules mock;
};

/// Keys: tau_iou, tau_text, eta_occ, delta, area_budget, min_spans,
/// rule.gap_density, rule.boundary_density, llm.model, llm.temperature,
/// llm.max_tokens, llm.attempts, llm.base_url, llm.path, llm.api_key_env,
/// llm.template_dir, mock.drop, mock.misclass. Unknown keys are errors.
void apply_setting(Settings& settings, std::string_view key, std::string_view value);

/// JSON when the first non-space character is '{', key-value lines otherwise.
Settings parse_settings(std::string_view text);
Settings load_settings(const std::filesystem::path& path);

}  // namespace prosa
