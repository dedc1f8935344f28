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

#include "prosa/record.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace prosa {
namespace {

std::string number(double v) { return fmt::format("{:.6f}", v); }

std::string number(const std::optional<double>& v) {
  return v ? number(*v) : std::string();
}

double parse_double(const std::string& s, std::string_view column, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(fmt::format("line {}: column {} is not a number: '{}'", line, column, s));
  }
  return v;
}

std::optional<double> parse_optional(const std::string& s, std::string_view column,
                                     std::size_t line) {
  if (s.empty()) return std::nullopt;
  return parse_double(s, column, line);
}

}  // namespace

std::string_view column_name(Variable v) noexcept {
  switch (v) {
    case Variable::kTor: return "TOR";
    case Variable::kAcr: return "ACR";
    case Variable::kBpo: return "BPO";
    case Variable::kBoc: return "BOC";
    case Variable::kEir: return "EIR";
    case Variable::kBSlr: return "B_SLR";
    case Variable::kBSlrIouOnly: return "B_SLR_iou_only";
    case Variable::kSlrMiss: return "SLR_miss";
    case Variable::kSlrTopo: return "SLR_topo";
    case Variable::kCer: return "CER_matched_mean";
    case Variable::kMapClean: return "mAP_clean";
    case Variable::kMapAdv: return "mAP_adv";
    case Variable::kDeltaMap: return "delta_mAP";
  }
  return "TOR";
}

std::optional<Variable> parse_variable(std::string_view column) noexcept {
  for (Variable v : kAllVariables) {
    if (column_name(v) == column) return v;
  }
  return std::nullopt;
}

std::optional<double> value(const CampaignRecord& r, Variable v) noexcept {
  switch (v) {
    case Variable::kTor: return r.tor;
    case Variable::kAcr: return r.acr;
    case Variable::kBpo: return r.bpo;
    case Variable::kBoc: return r.boc;
    case Variable::kEir: return r.eir;
    case Variable::kBSlr: return r.b_slr;
    case Variable::kBSlrIouOnly: return r.b_slr_iou_only;
    case Variable::kSlrMiss: return r.slr_miss;
    case Variable::kSlrTopo: return r.slr_topo;
    case Variable::kCer: return r.cer;
    case Variable::kMapClean: return r.map_clean;
    case Variable::kMapAdv: return r.map_adv;
    case Variable::kDeltaMap: return r.delta_map;
  }
  return std::nullopt;
}

CampaignRecord make_record(std::string image_id, std::string config_id,
                           const DiagnosticRecord& d) {
  CampaignRecord r;
  r.image_id = std::move(image_id);
  r.config_id = std::move(config_id);
  r.tor = d.exposure.tor;
  r.acr = d.exposure.acr;
  r.bpo = d.exposure.bpo;
  r.boc = d.exposure.boc;
  r.eir = d.exposure.eir;
  r.b_slr = d.structural.b_slr;
  r.b_slr_iou_only = d.structural.iou_only;
  r.slr_miss = d.slr_miss;
  r.slr_topo = d.slr_topo;
  r.cer = d.terminal.cer_matched_mean;
  r.map_clean = d.terminal.map_clean;
  r.map_adv = d.terminal.map_adv;
  r.delta_map = d.terminal.delta_map;
  r.n_orig_spans = d.n_orig_spans;
  return r;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_header(bool with_policy) {
  std::string h;
  for (std::size_t i = 0; i < kRecordColumns.size(); ++i) {
    if (i) h += ',';
    h += kRecordColumns[i];
  }
  if (with_policy) {
    h += ',';
    h += kPolicyColumn;
  }
  return h;
}

std::string format_row(const CampaignRecord& r, bool with_policy) {
  std::string row = fmt::format(
      "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", csv_escape(r.image_id),
      csv_escape(r.config_id), number(r.tor), number(r.acr), number(r.bpo),
      number(r.boc), number(r.eir), number(r.b_slr), number(r.b_slr_iou_only),
      number(r.slr_miss), number(r.slr_topo), number(r.cer), number(r.map_clean),
      number(r.map_adv), number(r.delta_map), r.n_orig_spans);
  if (with_policy) {
    row += ',';
    row += csv_escape(r.policy);
  }
  return row;
}

void write_csv(std::ostream& out, std::span<const CampaignRecord> records,
               bool with_policy) {
  out << csv_header(with_policy) << '\n';
  for (const CampaignRecord& r : records) out << format_row(r, with_policy) << '\n';
}

void write_csv(const std::filesystem::path& path,
               std::span<const CampaignRecord> records, bool with_policy) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  write_csv(out, records, with_policy);
  if (!out) throw Error(fmt::format("failed writing {}", path.string()));
}

std::vector<CampaignRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("empty record file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  const bool with_policy = header.size() == kRecordColumns.size() + 1;
  if (header.size() != kRecordColumns.size() && !with_policy) {
    throw Error(fmt::format("record header has {} columns, expected {}",
                            header.size(), kRecordColumns.size()));
  }
  for (std::size_t i = 0; i < kRecordColumns.size(); ++i) {
    if (header[i] != kRecordColumns[i]) {
      throw Error(fmt::format("record header column {} is '{}', expected '{}'", i,
                              header[i], kRecordColumns[i]));
    }
  }
  if (with_policy && header.back() != kPolicyColumn) {
    throw Error(fmt::format("unexpected trailing column '{}'", header.back()));
  }
  std::vector<CampaignRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw Error(fmt::format("line {}: {} fields, expected {}", lineno, f.size(),
                              header.size()));
    }
    CampaignRecord r;
    r.image_id = f[0];
    r.config_id = f[1];
    r.tor = parse_double(f[2], "TOR", lineno);
    r.acr = parse_optional(f[3], "ACR", lineno);
    r.bpo = parse_optional(f[4], "BPO", lineno);
    r.boc = parse_optional(f[5], "BOC", lineno);
    r.eir = parse_double(f[6], "EIR", lineno);
    r.b_slr = parse_double(f[7], "B_SLR", lineno);
    r.b_slr_iou_only = parse_double(f[8], "B_SLR_iou_only", lineno);
    r.slr_miss = parse_double(f[9], "SLR_miss", lineno);
    r.slr_topo = parse_double(f[10], "SLR_topo", lineno);
    r.cer = parse_double(f[11], "CER_matched_mean", lineno);
    r.map_clean = parse_optional(f[12], "mAP_clean", lineno);
    r.map_adv = parse_optional(f[13], "mAP_adv", lineno);
    r.delta_map = parse_optional(f[14], "delta_mAP", lineno);
    r.n_orig_spans = static_cast<std::size_t>(parse_double(f[15], "n_orig_spans", lineno));
    if (with_policy) r.policy = f[16];
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<CampaignRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read {}", path.string()));
  return read_csv(in);
}

}  // namespace prosa
