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
// prosa: campaign runner, auditor, statistics and synthetic-pool tooling.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prosa/adapter.hpp"
#include "prosa/campaign.hpp"
#include "prosa/chat_client.hpp"
#include "prosa/downstream.hpp"
#include "prosa/image_io.hpp"
#include "prosa/page_audit.hpp"
#include "prosa/record.hpp"
#include "prosa/settings.hpp"
#include "prosa/stats.hpp"
#include "prosa/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string pool;
  std::string adapter;
  std::string out;
  std::string log;
  std::string settings;
  std::string cache;
  std::string workdir;
  bool keep_exchange = false;
  unsigned workers = 1;
  std::uint64_t seed = prosa::kBaseSeed;
  bool resume = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
  cmd->add_option("--pool", c.pool, "Directory of <id>.png pages and sidecars")->required();
  cmd->add_option("--adapter", c.adapter,
                  "Parser command run as '<cmd> --in <dir> --out <dir>', or 'mock' for the "
                  "in-process mock parser")
      ->required();
  auto* out = cmd->add_option("--out", c.out, "Output CSV");
  if (needs_out) out->required();
  cmd->add_option("--log", c.log, "Skip/parameter log (default: <out>.log.json)");
  cmd->add_option("--settings", c.settings, "Settings file (JSON or key = value)");
  cmd->add_option("--cache", c.cache, "Clean-parse cache directory");
  cmd->add_option("--workdir", c.workdir, "Exchange directory for subprocess adapters");
  cmd->add_flag("--keep-exchange", c.keep_exchange, "Keep exchange files after each batch");
  cmd->add_option("--workers", c.workers, "Pages processed in parallel")->check(CLI::Range(1u, 256u));
  cmd->add_option("--seed", c.seed, "Base seed");
}

prosa::Settings settings_of(const Common& c) {
  return c.settings.empty() ? prosa::Settings{} : prosa::load_settings(c.settings);
}

std::unique_ptr<prosa::ParserAdapter> make_adapter(const Common& c, const prosa::Settings& s) {
  if (c.adapter == "mock") return std::make_unique<prosa::MockParserAdapter>(s.mock);
  const fs::path work = c.workdir.empty()
                            ? fs::temp_directory_path() / fmt::format("prosa-{}", static_cast<long>(::getpid()))
                            : fs::path(c.workdir);
  return std::make_unique<prosa::SubprocessAdapter>(c.adapter, work, c.keep_exchange);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  out << doc.dump(2) << '\n';
  if (!out) throw prosa::Error(fmt::format("cannot write {}", path.string()));
}

/// Existing rows first, then new ones; sorted by (key order, pool order).
std::vector<prosa::CampaignRecord> merge_records(std::vector<prosa::CampaignRecord> old_rows,
                                                 std::vector<prosa::CampaignRecord> new_rows,
                                                 const std::vector<std::string>& key_order,
                                                 const std::vector<prosa::PoolPage>& pool,
                                                 bool by_policy) {
  std::map<std::string, std::size_t> key_rank;
  for (std::size_t i = 0; i < key_order.size(); ++i) key_rank.emplace(key_order[i], i);
  std::map<std::string, std::size_t> page_rank;
  for (const auto& p : pool) page_rank.emplace(p.id, p.index);
  for (auto& r : new_rows) old_rows.push_back(std::move(r));
  auto rank = [](const std::map<std::string, std::size_t>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? m.size() : it->second;
  };
  std::stable_sort(old_rows.begin(), old_rows.end(), [&](const auto& a, const auto& b) {
    const auto ka = rank(key_rank, by_policy ? a.policy : a.config_id);
    const auto kb = rank(key_rank, by_policy ? b.policy : b.config_id);
    if (ka != kb) return ka < kb;
    return rank(page_rank, a.image_id) < rank(page_rank, b.image_id);
  });
  return old_rows;
}

void report_skips(const prosa::CampaignResult& r) {
  std::cerr << fmt::format("{} record(s), {} skip(s), {} page(s) filtered\n", r.records.size(),
                           r.skips.size(), r.filtered.size());
  for (const auto& s : r.skips) {
    std::cerr << fmt::format("  skipped {} {}: {}\n", s.image_id, s.config_id, s.reason);
  }
}

int cmd_campaign(const Common& c, const std::string& matrix_name, const std::string& config_list) {
  const prosa::Settings s = settings_of(c);
  const auto pool = prosa::scan_pool(c.pool);
  prosa::CampaignOptions opt;
  if (!config_list.empty()) {
    for (const auto& id : split_list(config_list)) opt.configs.push_back(prosa::decode_config(id));
  } else {
    const auto kind = prosa::parse_matrix(matrix_name);
    if (!kind) throw prosa::Error(fmt::format("unknown matrix '{}' (a, nt, s, fixed, all)", matrix_name));
    opt.configs = prosa::matrix(*kind);
  }
  opt.base_seed = c.seed;
  opt.min_spans = s.min_spans;
  opt.workers = c.workers;
  opt.thresholds = s.thresholds;
  opt.area_budget = s.area_budget;
  if (!c.cache.empty()) opt.clean_cache = fs::path(c.cache);
  std::vector<prosa::CampaignRecord> existing;
  if (c.resume && fs::exists(c.out)) {
    existing = prosa::read_csv(fs::path(c.out));
    opt.completed = prosa::completed_from_records(existing);
  }
  auto adapter = make_adapter(c, s);
  prosa::CampaignResult result = prosa::run_phase1(pool, *adapter, opt);
  std::vector<std::string> order;
  for (const auto& spec : opt.configs) order.push_back(spec.id);
  const auto all = merge_records(std::move(existing), result.records, order, pool, false);
  prosa::write_csv(fs::path(c.out), all);
  auto log = prosa::campaign_log(result);
  log["seed"] = c.seed;
  log["adapter"] = adapter->name();
  log["configs"] = order;
  write_json(c.log.empty() ? fs::path(c.out + ".log.json") : fs::path(c.log), log);
  report_skips(result);
  return 0;
}

int cmd_phase2(const Common& c, const std::string& policy_list, const std::string& transcripts,
               bool record) {
  const prosa::Settings s = settings_of(c);
  const auto pool = prosa::scan_pool(c.pool);
  prosa::Phase2Options opt;
  std::vector<std::string> names = split_list(policy_list);
  for (const auto& n : names) {
    const auto kind = prosa::parse_policy_kind(n);
    if (!kind) throw prosa::Error(fmt::format("unknown policy '{}'", n));
    opt.policies.push_back(*kind);
  }
  opt.base_seed = c.seed;
  opt.min_spans = s.min_spans;
  opt.workers = c.workers;
  opt.thresholds = s.thresholds;
  opt.area_budget = s.area_budget;
  opt.rule = s.rule;
  opt.prompt = s.prompt;
  if (!c.cache.empty()) opt.clean_cache = fs::path(c.cache);

  std::shared_ptr<prosa::ChatClient> client;
  if (!transcripts.empty()) {
    auto store = std::make_shared<prosa::TranscriptStore>(transcripts);
    if (record) {
      if (s.http.base_url.empty()) throw prosa::Error("--record needs llm.base_url in the settings file");
      auto http = std::make_shared<prosa::HttpChatClient>(s.http);
      client = std::make_shared<prosa::BoundedClient>(
          std::make_shared<prosa::RecordingClient>(http, store), static_cast<int>(c.workers));
    } else {
      client = std::make_shared<prosa::ReplayClient>(store);
    }
  } else if (record) {
    throw prosa::Error("--record needs --transcripts");
  }
  opt.client = client.get();

  std::vector<prosa::CampaignRecord> existing;
  if (c.resume && fs::exists(c.out)) {
    existing = prosa::read_csv(fs::path(c.out));
    opt.completed = prosa::completed_from_records(existing);
  }
  auto adapter = make_adapter(c, s);
  prosa::CampaignResult result = prosa::run_phase2(pool, *adapter, opt);
  const auto all = merge_records(std::move(existing), result.records, names, pool, true);
  prosa::write_csv(fs::path(c.out), all, true);
  auto log = prosa::campaign_log(result);
  log["seed"] = c.seed;
  log["adapter"] = adapter->name();
  log["policies"] = names;
  write_json(c.log.empty() ? fs::path(c.out + ".log.json") : fs::path(c.log), log);
  report_skips(result);
  return 0;
}

int cmd_audit(const std::string& clean_path, const std::string& adv_path, const std::string& mask_path,
              const std::string& ann_path, const std::string& out_path, const std::string& settings) {
  const prosa::Settings s = settings.empty() ? prosa::Settings{} : prosa::load_settings(settings);
  const prosa::ParseOutput clean = prosa::load_parse_output(clean_path);
  const prosa::ParseOutput adv = prosa::load_parse_output(adv_path);
  prosa::Mask mask;
  if (!mask_path.empty()) {
    mask = prosa::read_mask_png(mask_path);
  } else {
    mask = prosa::Mask(static_cast<int>(std::lround(clean.page_width)),
                       static_cast<int>(std::lround(clean.page_height)));
  }
  std::optional<prosa::AnnotationSet> truth;
  if (!ann_path.empty()) truth = prosa::load_annotations(ann_path);
  const auto record = prosa::audit_page(clean, adv, mask, truth ? &*truth : nullptr, s.thresholds);
  const auto doc = prosa::to_json(record);
  if (out_path.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_json(out_path, doc);
  }
  return 0;
}

int cmd_stats(const std::string& records_path, const std::string& out_dir) {
  const auto records = prosa::read_csv(fs::path(records_path));
  if (out_dir.empty()) {
    std::cout << prosa::stats::report(records).dump(2) << '\n';
  } else {
    prosa::stats::write_report(records, out_dir);
    std::cerr << fmt::format("wrote report to {}\n", out_dir);
  }
  return 0;
}

int cmd_synth(const std::string& out_dir, std::size_t pages, std::uint64_t seed, int columns, int blocks,
              const std::string& qa_path) {
  std::vector<prosa::QaPair> qa;
  for (std::size_t i = 0; i < pages; ++i) {
    prosa::PageSpec spec;
    spec.columns = columns;
    spec.blocks = blocks;
    spec.seed = prosa::derive_seed({seed, i});
    const auto page = prosa::generate_page(spec, fmt::format("page_{:04d}", i));
    prosa::write_synthetic_page(page, out_dir);
    if (!qa_path.empty()) {
      auto page_qa = prosa::template_qa(page.annotations);
      qa.insert(qa.end(), page_qa.begin(), page_qa.end());
    }
  }
  if (!qa_path.empty()) prosa::write_qa(qa, qa_path);
  std::cerr << fmt::format("wrote {} page(s) to {}\n", pages, out_dir);
  return 0;
}

int cmd_retrieval(const Common& c, const std::string& qa_path, const std::string& rows_path) {
  const prosa::Settings s = settings_of(c);
  const auto pool = prosa::scan_pool(c.pool);
  const auto qa = prosa::load_qa(qa_path);
  prosa::DownstreamOptions opt;
  opt.base_seed = c.seed;
  opt.workers = c.workers;
  opt.thresholds = s.thresholds;
  auto adapter = make_adapter(c, s);
  const auto result = prosa::run_downstream(pool, *adapter, qa, opt);
  std::ofstream out(c.out, std::ios::binary);
  prosa::write_downstream_csv(out, result);
  if (!out) throw prosa::Error(fmt::format("cannot write {}", c.out));
  if (!rows_path.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.rows) {
      nlohmann::json outcomes = nlohmann::json::array();
      for (const auto& o : r.outcomes) {
        outcomes.push_back({{"answer_rank", o.answer_rank},
                            {"evidence_rank", o.evidence_rank},
                            {"answer_missing", o.answer_missing}});
      }
      rows.push_back({{"image_id", r.image_id},
                      {"condition", std::string(prosa::to_string(r.condition))},
                      {"tor", r.tor},
                      {"b_slr", r.b_slr},
                      {"placement_fallback", r.placement_fallback},
                      {"qa", std::move(outcomes)}});
    }
    write_json(rows_path, rows);
  }
  for (const auto& s : result.skips) {
    std::cerr << fmt::format("  skipped {} {}: {}\n", s.image_id, s.config_id, s.reason);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-aware robustness auditing for document layout parsers"};
  app.require_subcommand(1);

  Common campaign;
  std::string matrix = "fixed";
  std::string configs;
  auto* c1 = app.add_subcommand("campaign", "Run a config-matrix campaign");
  add_common(c1, campaign);
  c1->add_option("--matrix", matrix, "a, nt, s, fixed (A + NT) or all");
  c1->add_option("--configs", configs, "Comma-separated config ids (overrides --matrix)");
  c1->add_flag("--resume", campaign.resume, "Keep rows already in --out and run the rest");

  Common phase2;
  std::string policies = "random,rule";
  std::string transcripts;
  bool record = false;
  auto* c2 = app.add_subcommand("phase2", "Compare placement policies over one pool");
  add_common(c2, phase2);
  c2->add_option("--policies", policies, "random, rule, llm-biased, llm-neutral, vlm");
  c2->add_option("--transcripts", transcripts, "Transcript directory for prompted policies");
  c2->add_flag("--record", record, "Query the configured endpoint and store new transcripts");
  c2->add_flag("--resume", phase2.resume, "Keep rows already in --out and run the rest");

  std::string clean, adv, mask, annotations, audit_out, audit_settings;
  auto* c3 = app.add_subcommand("audit", "Audit one clean/perturbed parse pair");
  c3->add_option("--clean", clean, "Clean parse JSON")->required();
  c3->add_option("--adv", adv, "Perturbed parse JSON")->required();
  c3->add_option("--mask", mask, "Probe mask PNG (default: empty mask)");
  c3->add_option("--annotations", annotations, "Annotation JSON for ACR/BPO/BOC and mAP");
  c3->add_option("--out", audit_out, "Output JSON (default: stdout)");
  c3->add_option("--settings", audit_settings, "Settings file");

  std::string records, stats_out;
  auto* c4 = app.add_subcommand("stats", "Statistical report over a record CSV");
  c4->add_option("--records", records, "Record CSV")->required();
  c4->add_option("--out", stats_out, "Output directory (default: JSON on stdout)");

  std::string synth_out, qa_out;
  std::size_t pages = 10;
  std::uint64_t synth_seed = prosa::kBaseSeed;
  int columns = 2;
  int blocks = 8;
  auto* c5 = app.add_subcommand("synth", "Generate a synthetic page pool");
  c5->add_option("--out", synth_out, "Output directory")->required();
  c5->add_option("--pages", pages, "Number of pages");
  c5->add_option("--seed", synth_seed, "Generator seed");
  c5->add_option("--columns", columns, "Columns per page");
  c5->add_option("--blocks", blocks, "Blocks per page");
  c5->add_option("--qa", qa_out, "Also write template QA pairs to this file");

  Common retrieval;
  std::string qa_in, rows_out;
  auto* c6 = app.add_subcommand("retrieval", "Clean / AM / Str / LA retrieval comparison");
  add_common(c6, retrieval);
  c6->add_option("--qa", qa_in, "QA JSON file")->required();
  c6->add_option("--rows", rows_out, "Per-page rows JSON");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*c1) return cmd_campaign(campaign, matrix, configs);
    if (*c2) return cmd_phase2(phase2, policies, transcripts, record);
    if (*c3) return cmd_audit(clean, adv, mask, annotations, audit_out, audit_settings);
    if (*c4) return cmd_stats(records, stats_out);
    if (*c5) return cmd_synth(synth_out, pages, synth_seed, columns, blocks, qa_out);
    if (*c6) return cmd_retrieval(retrieval, qa_in, rows_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
