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

#include "prosa/downstream.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "prosa/image_io.hpp"
#include "prosa/page_audit.hpp"
#include "prosa/placement.hpp"

namespace prosa {

std::string_view to_string(Condition c) noexcept {
  switch (c) {
    case Condition::kClean: return "clean";
    case Condition::kAreaMatched: return "AM";
    case Condition::kStructural: return "Str";
    case Condition::kLargeArea: return "LA";
  }
  return "clean";
}

ProbeConfig structural_condition() {
  ProbeConfig c = default_config(ProbeId::kP5);
  c.placement = Placement::kBridge;
  c.w = 1.0;
  c.l_r = 0.5;
  c.probe_count = 3;
  return c;
}

ProbeConfig large_area_condition() {
  ProbeConfig c = default_config(ProbeId::kP4);
  c.placement = Placement::kContent;
  c.a_area = 0.166;
  c.beta = 1.0;
  return c;
}

DownstreamResult run_downstream(const std::vector<PoolPage>& pool, ParserAdapter& adapter,
                                const std::vector<QaPair>& qa, const DownstreamOptions& options) {
  std::map<std::string, std::vector<QaPair>> by_page;
  for (const QaPair& q : qa) by_page[q.page_id].push_back(q);
  std::vector<const PoolPage*> pages;
  for (const PoolPage& p : pool) {
    if (by_page.contains(p.id)) pages.push_back(&p);
  }

  std::vector<std::vector<DownstreamRow>> rows(pages.size());
  std::vector<std::vector<SkipEntry>> skips(pages.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < pages.size(); i = next.fetch_add(1)) {
      const PoolPage& page = *pages[i];
      const auto& page_qa = by_page.at(page.id);
      try {
        const cv::Mat image = read_page_image(page.image);
        ParseJob clean_job;
        clean_job.key = page.id;
        clean_job.image_id = page.id;
        clean_job.source = page.image;
        clean_job.image = image;
        auto clean_out = adapter.parse(std::span<const ParseJob>(&clean_job, 1));
        if (clean_out.empty() || !clean_out[0].output) {
          throw Error(fmt::format("clean parse failed: {}", clean_out.empty() ? "" : clean_out[0].error));
        }
        const ParseOutput clean = std::move(*clean_out[0].output);
        const int W = image.cols;
        const int H = image.rows;
        const PageContext ctx = compute_page_context(clean, W, H);

        Rng str_rng(derive_seed({options.base_seed, page.index, fnv1a("downstream:Str")}));
        PerturbResult str = apply_probe(options.structural, image, ctx, str_rng, 1.0);

        const double area = static_cast<double>(str.mask.support.count());
        ProbeConfig am = default_config(ProbeId::kP4);
        am.behavior = Behavior::kErase;
        am.beta = 1.0;
        am.a_area = area / (static_cast<double>(W) * H);
        Rng am_rng(derive_seed({options.base_seed, page.index, fnv1a("downstream:AM")}));
        ProbeMask am_mask = ProbeMask::blank(W, H);
        bool am_fallback = false;
        if (area > 0.0) {
          const auto [rw, rh] = rect_size_for_area(am.a_area, W, H);
          auto pose = place_in_whitespace(ctx, std::max(rw, 1), std::max(rh, 1), options.clearance, am_rng);
          if (!pose) {
            am_fallback = true;
            pose = Pose{static_cast<int>(am_rng.uniform_int(0, W - 1)),
                        static_cast<int>(am_rng.uniform_int(0, H - 1))};
          }
          am_mask = render_probe(am, *pose, image);
        }

        Rng la_rng(derive_seed({options.base_seed, page.index, fnv1a("downstream:LA")}));
        PerturbResult la = apply_probe(options.large_area, image, ctx, la_rng, 1.0);

        std::vector<ParseJob> jobs(3);
        const std::array<Condition, 3> conds = {Condition::kAreaMatched, Condition::kStructural,
                                                Condition::kLargeArea};
        const std::array<const ProbeMask*, 3> masks = {&am_mask, &str.mask, &la.mask};
        for (std::size_t k = 0; k < 3; ++k) {
          jobs[k].key = fmt::format("{}__{}", page.id, to_string(conds[k]));
          jobs[k].image_id = page.id;
          jobs[k].source = page.image;
          jobs[k].image = k == 0 ? compose(image, am_mask) : k == 1 ? str.image : la.image;
          jobs[k].support = masks[k]->support;
          jobs[k].inject = masks[k]->inject;
        }
        const auto outcomes = adapter.parse(jobs);

        DownstreamRow clean_row;
        clean_row.image_id = page.id;
        clean_row.outcomes = evaluate_page_bm25(page_qa, clean, options.chunking);
        rows[i].push_back(std::move(clean_row));
        for (std::size_t k = 0; k < 3; ++k) {
          if (k >= outcomes.size() || !outcomes[k].output) {
            skips[i].push_back({page.id, std::string(to_string(conds[k])),
                                k < outcomes.size() ? outcomes[k].error : "missing outcome"});
            continue;
          }
          const ParseOutput& adv = *outcomes[k].output;
          const DiagnosticRecord diag = audit_page(clean, adv, jobs[k].support, nullptr, options.thresholds);
          DownstreamRow row;
          row.image_id = page.id;
          row.condition = conds[k];
          row.tor = diag.exposure.tor;
          row.b_slr = diag.structural.b_slr;
          row.placement_fallback = k == 0 && am_fallback;
          row.outcomes = evaluate_page_bm25(page_qa, adv, options.chunking);
          rows[i].push_back(std::move(row));
        }
      } catch (const std::exception& e) {
        skips[i].push_back({page.id, "*", e.what()});
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(pages.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }

  DownstreamResult out;
  for (auto& r : rows) {
    std::sort(r.begin(), r.end(), [](const DownstreamRow& a, const DownstreamRow& b) {
      return static_cast<int>(a.condition) < static_cast<int>(b.condition);
    });
    for (auto& row : r) out.rows.push_back(std::move(row));
  }
  for (auto& s : skips) {
    for (auto& e : s) out.skips.push_back(std::move(e));
  }
  for (std::size_t c = 0; c < kAllConditions.size(); ++c) {
    ConditionSummary& s = out.summary[c];
    s.condition = kAllConditions[c];
    std::vector<QaOutcome> all;
    for (const DownstreamRow& row : out.rows) {
      if (row.condition != s.condition) continue;
      ++s.pages;
      s.mean_tor += row.tor;
      s.mean_b_slr += row.b_slr;
      all.insert(all.end(), row.outcomes.begin(), row.outcomes.end());
    }
    if (s.pages > 0) {
      s.mean_tor /= static_cast<double>(s.pages);
      s.mean_b_slr /= static_cast<double>(s.pages);
    }
    s.bm25 = aggregate_metrics(all);
  }
  return out;
}

void write_downstream_csv(std::ostream& out, const DownstreamResult& result) {
  out << "condition,pages,n_qa,mean_TOR,mean_B_SLR,answer_missing,Recall@1,Recall@5,Recall@10,"
         "AnswerHit@1,AnswerHit@5,AnswerHit@10,MRR@10\n";
  for (const ConditionSummary& s : result.summary) {
    const RetrievalMetrics& m = s.bm25;
    out << fmt::format("{},{},{},{:.6f},{:.6f},{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{:.4f}\n",
                       to_string(s.condition), s.pages, m.n, s.mean_tor, s.mean_b_slr,
                       m.answer_missing, m.recall_1, m.recall_5, m.recall_10, m.answer_hit_1,
                       m.answer_hit_5, m.answer_hit_10, m.mrr_10);
  }
}

}  // namespace prosa
