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
// Flat per-(image, config) campaign record and its CSV form.

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prosa/page_audit.hpp"

namespace prosa {

inline constexpr std::array<std::string_view, 16> kRecordColumns = {
    "image_id", "config_id",        "TOR",     "ACR",       "BPO",    "BOC",
    "EIR",      "B_SLR",            "B_SLR_iou_only",       "SLR_miss",
    "SLR_topo", "CER_matched_mean", "mAP_clean", "mAP_adv", "delta_mAP",
    "n_orig_spans"};
inline constexpr std::string_view kPolicyColumn = "policy";

struct CampaignRecord {
  std::string image_id;
  std::string config_id;
  double tor = 0.0;
  std::optional<double> acr;
  std::optional<double> bpo;
  std::optional<double> boc;
  double eir = 0.0;
  double b_slr = 0.0;
  double b_slr_iou_only = 0.0;
  double slr_miss = 0.0;
  double slr_topo = 0.0;
  double cer = 0.0;
  std::optional<double> map_clean;
  std::optional<double> map_adv;
  std::optional<double> delta_map;
  std::size_t n_orig_spans = 0;
  /// Phase-2 only; empty in Phase-1 files.
  std::string policy;

  friend bool operator==(const CampaignRecord&, const CampaignRecord&) = default;
};

enum class Variable : std::uint8_t {
  kTor, kAcr, kBpo, kBoc, kEir, kBSlr, kBSlrIouOnly, kSlrMiss, kSlrTopo,
  kCer, kMapClean, kMapAdv, kDeltaMap,
};

inline constexpr std::array<Variable, 13> kAllVariables = {
    Variable::kTor,     Variable::kAcr,        Variable::kBpo,
    Variable::kBoc,     Variable::kEir,        Variable::kBSlr,
    Variable::kBSlrIouOnly, Variable::kSlrMiss, Variable::kSlrTopo,
    Variable::kCer,     Variable::kMapClean,   Variable::kMapAdv,
    Variable::kDeltaMap};

std::string_view column_name(Variable v) noexcept;
std::optional<Variable> parse_variable(std::string_view column) noexcept;
std::optional<double> value(const CampaignRecord& r, Variable v) noexcept;

CampaignRecord make_record(std::string image_id, std::string config_id,
                           const DiagnosticRecord& diagnostic);

/// Six decimals, empty cell for absent values.
std::string format_row(const CampaignRecord& r, bool with_policy);
std::string csv_header(bool with_policy);

void write_csv(std::ostream& out, std::span<const CampaignRecord> records,
               bool with_policy = false);
void write_csv(const std::filesystem::path& path,
               std::span<const CampaignRecord> records, bool with_policy = false);

/// Requires the exact column set; a trailing policy column is optional.
std::vector<CampaignRecord> read_csv(std::istream& in);
std::vector<CampaignRecord> read_csv(const std::filesystem::path& path);

/// RFC 4180 field splitting.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_escape(std::string_view field);

}  // namespace prosa
