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
// One-page diagnostic record combining the structural audit, exposure
// descriptors and terminal scores.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "prosa/audit.hpp"
#include "prosa/terminal.hpp"

namespace prosa {

struct ElementAuditRow {
  std::size_t clean_index = 0;
  std::optional<std::size_t> adv_index;
  double iou = 0.0;
  double text_sim = 0.0;
  double rho = 0.0;
  Pathway label = Pathway::kIntact;
};

struct DiagnosticRecord {
  std::string page_id;
  ExposureDescriptors exposure;
  BSlr structural;
  double slr_miss = 0.0;
  double slr_topo = 0.0;
  std::size_t n_miss = 0;
  std::size_t n_merge = 0;
  std::size_t n_misclass = 0;
  std::size_t n_degraded = 0;
  TerminalScores terminal;
  std::size_t n_orig_spans = 0;
  std::size_t truncated_texts = 0;
  std::vector<ElementAuditRow> rows;
};

/// Thrown when the clean parse is empty, so B-SLR is undefined.
class EmptyCleanParse : public Error {
 public:
  using Error::Error;
};

DiagnosticRecord audit_page(const ParseOutput& clean, const ParseOutput& adv,
                            const Mask& support, const AnnotationSet* truth,
                            const AnnotationGeometry* truth_geometry,
                            const AuditThresholds& thresholds = {});

/// Convenience form that rasterizes the annotation geometry itself.
DiagnosticRecord audit_page(const ParseOutput& clean, const ParseOutput& adv,
                            const Mask& support, const AnnotationSet* truth,
                            const AuditThresholds& thresholds = {});

nlohmann::json to_json(const DiagnosticRecord& record);

}  // namespace prosa
