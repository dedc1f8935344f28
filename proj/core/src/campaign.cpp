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

#include "prosa/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include <fmt/format.h>

#include "prosa/hash.hpp"
#include "prosa/image_io.hpp"
#include "prosa/page_audit.hpp"
#include "prosa/placement.hpp"

namespace prosa {
namespace {

namespace fs = std::filesystem;

struct Slot {
  std::optional<CampaignRecord> record;
  std::optional<SkipEntry> skip;
  nlohmann::json params;
  bool attempted = false;
};

struct PageResult {
  std::vector<Slot> slots;
  std::optional<FilteredPage> filtered;
};

struct LoadedPage {
  cv::Mat image;
  std::optional<AnnotationSet> truth;
  std::optional<AnnotationGeometry> geometry;
  ParseOutput clean;
};

ParseOutput clean_parse(const PoolPage& page, const cv::Mat& image, ParserAdapter& adapter,
                        const std::optional<fs::path>& cache) {
  fs::path cached;
  if (cache) {
    cached = *cache / (sha256_file(page.image) + ".json");
    if (fs::exists(cached)) return load_parse_output(cached);
  }
  ParseJob job;
  job.key = page.id;
  job.image_id = page.id;
  job.source = page.image;
  job.image = image;
  auto outcomes = adapter.parse(std::span<const ParseJob>(&job, 1));
  if (outcomes.empty() || !outcomes[0].output) {
    throw Error(fmt::format("clean parse failed: {}",
                            outcomes.empty() ? "no outcome" : outcomes[0].error));
  }
  if (cache) {
    fs::create_directories(*cache);
    const fs::path tmp = cached.string() + fmt::format(".tmp{}", page.index);
    write_parse_output(*outcomes[0].output, tmp);
    fs::rename(tmp, cached);
  }
  return std::move(*outcomes[0].output);
}

LoadedPage load_page(const PoolPage& page, ParserAdapter& adapter,
                     const std::optional<fs::path>& cache, int delta) {
  LoadedPage p;
  p.image = read_page_image(page.image);
  if (page.annotations) {
    p.truth = load_annotations(*page.annotations);
    p.geometry.emplace(*p.truth, p.image.cols, p.image.rows, delta);
  }
  p.clean = clean_parse(page, p.image, adapter, cache);
  return p;
}

void run_pages(std::size_t count, unsigned workers,
               const std::function<void(std::size_t)>& work) {
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) work(i);
  };
  if (n == 1) {
    loop();
    return;
  }
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < n; ++t) threads.emplace_back(loop);
  for (auto& t : threads) t.join();
}

/// Audits parsed jobs into slots; a failed job becomes a skip.
void finish_slots(const PoolPage& page, const LoadedPage& loaded,
                  const std::vector<ParseJob>& jobs, const std::vector<std::size_t>& slot_of,
                  const std::vector<std::string>& config_ids, std::vector<Slot>& slots,
                  ParserAdapter& adapter, const AuditThresholds& thresholds,
                  const std::vector<std::string>& policy_names,
                  const AuditObserver& observer = {}) {
  const auto outcomes = adapter.parse(jobs);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    Slot& slot = slots[slot_of[j]];
    const std::string& config_id = config_ids[j];
    if (j >= outcomes.size() || !outcomes[j].output) {
      slot.skip = SkipEntry{page.id, config_id,
                            j < outcomes.size() ? outcomes[j].error : "adapter returned too few outcomes"};
      continue;
    }
    try {
      const DiagnosticRecord diag =
          audit_page(loaded.clean, *outcomes[j].output, jobs[j].support,
                     loaded.truth ? &*loaded.truth : nullptr,
                     loaded.geometry ? &*loaded.geometry : nullptr, thresholds);
      if (observer) observer(page.id, config_id, diag);
      CampaignRecord rec = make_record(page.id, config_id, diag);
      if (!policy_names.empty()) rec.policy = policy_names[j];
      slot.record = std::move(rec);
    } catch (const Error& e) {
      slot.skip = SkipEntry{page.id, config_id, fmt::format("audit failed: {}", e.what())};
    }
  }
}

nlohmann::json placements_json(const std::vector<PlacementResult>& placements) {
  nlohmann::json arr = nlohmann::json::array();
  for (const PlacementResult& p : placements) {
    nlohmann::json j = {{"x", p.pose.x},
                        {"y", p.pose.y},
                        {"requested", std::string(to_string(p.requested))},
                        {"used", std::string(to_string(p.used))},
                        {"fallback", p.fallback}};
    if (p.gap) j["gap"] = *p.gap;
    arr.push_back(std::move(j));
  }
  return arr;
}

CampaignResult assemble(const std::vector<PoolPage>& pool, std::vector<PageResult>& results,
                        std::size_t slot_count) {
  CampaignResult out;
  for (std::size_t c = 0; c < slot_count; ++c) {
    for (std::size_t p = 0; p < pool.size(); ++p) {
      if (results[p].slots.empty()) continue;
      Slot& slot = results[p].slots[c];
      if (!slot.attempted) continue;
      if (slot.record) out.records.push_back(std::move(*slot.record));
      if (slot.skip) out.skips.push_back(std::move(*slot.skip));
      if (!slot.params.is_null()) out.params.push_back(std::move(slot.params));
    }
  }
  for (std::size_t p = 0; p < pool.size(); ++p) {
    if (results[p].filtered) out.filtered.push_back(std::move(*results[p].filtered));
  }
  return out;
}

/// Loads the page and applies the span filter. Returns nullopt when the
/// page is filtered or failed; failures mark every pending slot skipped.
std::optional<LoadedPage> prepare(const PoolPage& page, ParserAdapter& adapter,
                                  const std::optional<fs::path>& cache, int delta,
                                  std::size_t min_spans, const std::vector<std::string>& ids,
                                  PageResult& result) {
  try {
    LoadedPage loaded = load_page(page, adapter, cache, delta);
    const std::size_t n = loaded.clean.elements.size();
    if (n < min_spans) {
      result.filtered = FilteredPage{page.id, n, fmt::format("n_orig_spans {} < {}", n, min_spans)};
      for (Slot& s : result.slots) s.attempted = false;
      return std::nullopt;
    }
    return loaded;
  } catch (const std::exception& e) {
    for (std::size_t c = 0; c < result.slots.size(); ++c) {
      if (result.slots[c].attempted) result.slots[c].skip = SkipEntry{page.id, ids[c], e.what()};
    }
    return std::nullopt;
  }
}

}  // namespace

std::vector<PoolPage> scan_pool(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(fmt::format("pool directory {} not found", dir.string()));
  std::vector<PoolPage> pool;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_exchange_image(entry.path())) continue;
    PoolPage page;
    page.id = entry.path().stem().string();
    page.image = entry.path();
    const fs::path ann = dir / (page.id + ".annotations.json");
    if (fs::exists(ann)) page.annotations = ann;
    pool.push_back(std::move(page));
  }
  std::sort(pool.begin(), pool.end(), [](const PoolPage& a, const PoolPage& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i].index = i;
  if (pool.empty()) throw Error(fmt::format("pool directory {} holds no page images", dir.string()));
  return pool;
}

CampaignResult run_phase1(const std::vector<PoolPage>& pool, ParserAdapter& adapter,
                          const CampaignOptions& options) {
  const auto& configs = options.configs;
  std::vector<std::string> ids;
  for (const ConfigSpec& c : configs) ids.push_back(c.id);
  std::vector<PageResult> results(pool.size());

  run_pages(pool.size(), options.workers, [&](std::size_t p) {
    const PoolPage& page = pool[p];
    PageResult& result = results[p];
    result.slots.resize(configs.size());
    bool pending = false;
    for (std::size_t c = 0; c < configs.size(); ++c) {
      result.slots[c].attempted = !options.completed.contains({page.id, configs[c].id});
      pending = pending || result.slots[c].attempted;
    }
    if (!pending) return;
    auto loaded = prepare(page, adapter, options.clean_cache, options.thresholds.delta,
                          options.min_spans, ids, result);
    if (!loaded) return;
    const int width = loaded->image.cols;
    const int height = loaded->image.rows;
    const PageContext ctx = compute_page_context(loaded->clean, width, height);
    const std::vector<BBox> clean_boxes = boxes_of(loaded->clean.elements);

    std::vector<ParseJob> jobs;
    std::vector<std::size_t> slot_of;
    std::vector<std::string> job_ids;
    for (std::size_t c = 0; c < configs.size(); ++c) {
      Slot& slot = result.slots[c];
      if (!slot.attempted) continue;
      const ConfigSpec& spec = configs[c];
      const std::uint64_t seed = config_seed(spec, page.index, options.base_seed);
      Rng rng(seed);
      ParseJob job;
      job.key = fmt::format("{}__{}", page.id, spec.id);
      job.image_id = page.id;
      job.source = page.image;
      slot.params = {{"image_id", page.id}, {"config_id", spec.id}};
      try {
        if (spec.kind == ConfigKind::kTarget) {
          const NtOptions nt = nt_options();
          NtResult r = nt_place(spec.nt_target, nt, ctx, clean_boxes, loaded->image, seed, rng);
          job.image = compose(loaded->image, r.mask);
          job.support = std::move(r.mask.support);
          job.inject = std::move(r.mask.inject);
          slot.params["nt"] = {{"target", r.target},
                               {"achieved", r.achieved},
                               {"stamps", r.stamps},
                               {"shortfall", r.shortfall}};
        } else {
          const ProbeConfig probe = instantiate(spec, page.index, options.base_seed);
          PerturbResult r = apply_probe(probe, loaded->image, ctx, rng, options.area_budget);
          job.image = std::move(r.image);
          job.support = std::move(r.mask.support);
          job.inject = std::move(r.mask.inject);
          slot.params["probe"] = to_json(probe);
          slot.params["placements"] = placements_json(r.placements);
          slot.params["budget_skipped"] = r.budget_skipped;
        }
      } catch (const Error& e) {
        slot.skip = SkipEntry{page.id, spec.id, fmt::format("perturbation failed: {}", e.what())};
        continue;
      }
      jobs.push_back(std::move(job));
      slot_of.push_back(c);
      job_ids.push_back(spec.id);
    }
    finish_slots(page, *loaded, jobs, slot_of, job_ids, result.slots, adapter, options.thresholds, {},
                 options.observer);
  });
  return assemble(pool, results, configs.size());
}

CampaignResult run_phase2(const std::vector<PoolPage>& pool, ParserAdapter& adapter,
                          const Phase2Options& options) {
  std::vector<std::string> names;
  bool prompted = false;
  for (PolicyKind k : options.policies) {
    names.emplace_back(to_string(k));
    prompted = prompted || (k != PolicyKind::kRandom && k != PolicyKind::kRule);
  }
  if (prompted && options.client == nullptr) {
    throw Error("prompted policies need a chat client (transcripts or API endpoint)");
  }
  std::vector<PageResult> results(pool.size());

  run_pages(pool.size(), options.workers, [&](std::size_t p) {
    const PoolPage& page = pool[p];
    PageResult& result = results[p];
    result.slots.resize(names.size());
    bool pending = false;
    for (std::size_t k = 0; k < names.size(); ++k) {
      result.slots[k].attempted = !options.completed.contains({page.id, names[k]});
      pending = pending || result.slots[k].attempted;
    }
    if (!pending) return;
    auto loaded = prepare(page, adapter, options.clean_cache, options.thresholds.delta,
                          options.min_spans, names, result);
    if (!loaded) return;
    const PageContext ctx = compute_page_context(loaded->clean, loaded->image.cols, loaded->image.rows);
    const PolicyContext pctx = compute_policy_context(loaded->image, loaded->clean, ctx);

    std::vector<ParseJob> jobs;
    std::vector<std::size_t> slot_of;
    std::vector<std::string> job_ids;
    std::vector<std::string> job_policies;
    for (std::size_t k = 0; k < names.size(); ++k) {
      Slot& slot = result.slots[k];
      if (!slot.attempted) continue;
      const PolicyKind kind = options.policies[k];
      Rng rng(derive_seed({options.base_seed, page.index, fnv1a("policy:" + names[k])}));
      std::string config_id = names[k];
      try {
        PolicyDecision d;
        switch (kind) {
          case PolicyKind::kRandom: d = policy_random(rng); break;
          case PolicyKind::kRule: d = policy_rule(pctx, rng, options.rule); break;
          default: d = policy_prompted(kind, pctx, loaded->image, *options.client, rng, options.prompt);
        }
        config_id = fmt::format("{}-{}", to_string(d.config.probe), to_string(d.config.placement));
        PerturbResult r = apply_probe(d.config, loaded->image, ctx, rng, options.area_budget);
        slot.params = {{"image_id", page.id},
                       {"config_id", config_id},
                       {"decision", to_json(d)},
                       {"placements", placements_json(r.placements)},
                       {"budget_skipped", r.budget_skipped}};
        ParseJob job;
        job.key = fmt::format("{}__{}", page.id, names[k]);
        job.image_id = page.id;
        job.source = page.image;
        job.image = std::move(r.image);
        job.support = std::move(r.mask.support);
        job.inject = std::move(r.mask.inject);
        jobs.push_back(std::move(job));
        slot_of.push_back(k);
        job_ids.push_back(config_id);
        job_policies.push_back(names[k]);
      } catch (const Error& e) {
        slot.skip = SkipEntry{page.id, names[k], e.what()};
      }
    }
    finish_slots(page, *loaded, jobs, slot_of, job_ids, result.slots, adapter, options.thresholds,
                 job_policies);
  });
  return assemble(pool, results, names.size());
}

nlohmann::json to_json(const SkipEntry& s) {
  return {{"image_id", s.image_id}, {"config_id", s.config_id}, {"reason", s.reason}};
}

nlohmann::json to_json(const FilteredPage& f) {
  return {{"image_id", f.image_id}, {"n_orig_spans", f.n_orig_spans}, {"reason", f.reason}};
}

nlohmann::json campaign_log(const CampaignResult& result) {
  nlohmann::json skips = nlohmann::json::array();
  for (const SkipEntry& s : result.skips) skips.push_back(to_json(s));
  nlohmann::json filtered = nlohmann::json::array();
  for (const FilteredPage& f : result.filtered) filtered.push_back(to_json(f));
  return {{"records", result.records.size()},
          {"skips", std::move(skips)},
          {"filtered", std::move(filtered)},
          {"params", result.params}};
}

CompletedSet completed_from_records(const std::vector<CampaignRecord>& records) {
  CompletedSet out;
  for (const CampaignRecord& r : records) {
    out.emplace(r.image_id, r.policy.empty() ? r.config_id : r.policy);
  }
  return out;
}

}  // namespace prosa
