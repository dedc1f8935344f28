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

#include "prosa/page_audit.hpp"

#include <nlohmann/json.hpp>

namespace prosa {
namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

DiagnosticRecord audit_page(const ParseOutput& clean, const ParseOutput& adv,
                            const Mask& support, const AnnotationSet* truth,
                            const AnnotationGeometry* truth_geometry,
                            const AuditThresholds& thresholds) {
  if (clean.elements.empty()) {
    throw EmptyCleanParse("clean parse has no elements; B-SLR is undefined");
  }
  DiagnosticRecord r;
  r.page_id = clean.page_id;
  r.n_orig_spans = clean.elements.size();
  const MatchResult matches = match(clean, adv, thresholds);
  r.structural = *b_slr(matches, thresholds);
  const PathwayAttribution paths =
      attribute_pathways(matches, clean, adv, support, thresholds);
  r.slr_miss = paths.slr_miss;
  r.slr_topo = paths.slr_topo;
  r.n_miss = paths.n_miss;
  r.n_merge = paths.n_merge;
  r.n_misclass = paths.n_misclass;
  r.n_degraded = paths.n_degraded;
  r.exposure = exposure(support, truth_geometry, clean);
  r.terminal = terminal_scores(clean, adv, matches, truth);
  r.rows.reserve(clean.elements.size());
  for (std::size_t i = 0; i < clean.elements.size(); ++i) {
    const ElementMatch& m = matches.elements[i];
    if (m.truncated) ++r.truncated_texts;
    r.rows.push_back({i, m.adv_index, m.iou, m.text_sim, paths.rho[i], paths.labels[i]});
  }
  return r;
}

DiagnosticRecord audit_page(const ParseOutput& clean, const ParseOutput& adv,
                            const Mask& support, const AnnotationSet* truth,
                            const AuditThresholds& thresholds) {
  if (truth == nullptr) {
    return audit_page(clean, adv, support, nullptr, nullptr, thresholds);
  }
  const AnnotationGeometry geometry(*truth, support.width(), support.height(),
                                    thresholds.delta);
  return audit_page(clean, adv, support, truth, &geometry, thresholds);
}

nlohmann::json to_json(const DiagnosticRecord& r) {
  nlohmann::json doc;
  doc["page_id"] = r.page_id;
  doc["n_orig_spans"] = r.n_orig_spans;
  doc["exposure"] = {{"TOR", r.exposure.tor},
                     {"ACR", optional_number(r.exposure.acr)},
                     {"BPO", optional_number(r.exposure.bpo)},
                     {"BOC", optional_number(r.exposure.boc)},
                     {"EIR", r.exposure.eir}};
  doc["structural"] = {{"B_SLR", r.structural.b_slr},
                       {"B_SLR_iou_only", r.structural.iou_only},
                       {"B_SLR_text_only", r.structural.text_only},
                       {"SLR_miss", r.slr_miss},
                       {"SLR_topo", r.slr_topo},
                       {"n_failed", r.structural.failed},
                       {"n_miss", r.n_miss},
                       {"n_merge", r.n_merge},
                       {"n_misclass", r.n_misclass},
                       {"n_degraded", r.n_degraded}};
  doc["terminal"] = {{"CER_matched_mean", r.terminal.cer_matched_mean},
                     {"mAP_clean", optional_number(r.terminal.map_clean)},
                     {"mAP_adv", optional_number(r.terminal.map_adv)},
                     {"delta_mAP", optional_number(r.terminal.delta_map)}};
  doc["truncated_texts"] = r.truncated_texts;
  nlohmann::json rows = nlohmann::json::array();
  for (const ElementAuditRow& row : r.rows) {
    rows.push_back({{"clean_index", row.clean_index},
                    {"adv_index", row.adv_index ? nlohmann::json(*row.adv_index)
                                                : nlohmann::json(nullptr)},
                    {"iou", row.iou},
                    {"text_sim", row.text_sim},
                    {"rho", row.rho},
                    {"label", std::string(to_string(row.label))}});
  }
  doc["elements"] = std::move(rows);
  return doc;
}

}  // namespace prosa
