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
// Terminal degradation judges: character error rate against the clean
// parse text and per-image mAP@0.5 against annotations.
//
// Parsers emit no confidence scores, so detections are ranked in parse
// output order. Each prediction is matched to the same-class ground truth
// box of highest IoU; it is a true positive when that IoU is at least 0.5
// and the box is still unmatched. AP uses all-points interpolation.

#pragma once

#include <optional>
#include <string_view>

#include "prosa/audit.hpp"
#include "prosa/document.hpp"

namespace prosa {

/// Edit distance (unit insert, delete, substitute) over code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Normalizes both strings; Levenshtein(r, h) / |r| when overlapped, else 1.
/// Throws Error when the normalized reference is empty.
double cer_element(std::string_view reference, std::string_view hypothesis,
                   bool overlapped);

/// Mean element CER over clean elements with non-empty normalized text. An
/// element counts as overlapped when its best match has IoU > 0. Returns 1
/// when no clean element carries text.
double mean_cer(const ParseOutput& clean, const ParseOutput& adv,
                const MatchResult& matches);

inline constexpr double kMapIou = 0.5;

/// Mean per-class AP over the canonical classes present in the ground truth.
/// Nullopt when the ground truth is empty.
std::optional<double> map50(const AnnotationSet& truth, const ParseOutput& predictions);

struct TerminalScores {
  double cer_matched_mean = 1.0;
  std::optional<double> map_clean;
  std::optional<double> map_adv;
  std::optional<double> delta_map;
};

/// map(truth, clean) - map(truth, adv); nullopt when either side is.
std::optional<double> delta_map(const AnnotationSet& truth, const ParseOutput& clean,
                                const ParseOutput& adv);

TerminalScores terminal_scores(const ParseOutput& clean, const ParseOutput& adv,
                               const MatchResult& matches,
                               const AnnotationSet* truth);

}  // namespace prosa
