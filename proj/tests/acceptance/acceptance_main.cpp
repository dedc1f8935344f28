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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status 1 when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "prosa/adapter.hpp"
#include "prosa/audit.hpp"
#include "prosa/campaign.hpp"
#include "prosa/config_matrix.hpp"
#include "prosa/downstream.hpp"
#include "prosa/page_audit.hpp"
#include "prosa/placement.hpp"
#include "prosa/probe.hpp"
#include "prosa/record.hpp"
#include "prosa/retrieval.hpp"
#include "prosa/rng.hpp"
#include "prosa/stats.hpp"
#include "prosa/synthetic.hpp"
#include "prosa/terminal.hpp"

namespace {

using namespace prosa;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- strings

constexpr int kMaxLen = 8;
constexpr char kAlphabet[] = {'a', 'b', 'c'};

std::vector<std::string> all_strings() {
  std::vector<std::string> out{""};
  for (std::size_t begin = 0; out.back().size() < static_cast<std::size_t>(kMaxLen);) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (char c : kAlphabet) out.push_back(out[i] + c);
    }
    begin = end;
  }
  return out;
}

// all_strings() is breadth-first, so string k > 0 is string (k - 1) / 3
// extended by kAlphabet[(k - 1) % 3]. One DP row per string, each derived
// from its parent's row: rows[k] = DP[|b_k|][0..|a|].
template <typename Step>
void prefix_rows(const std::string& a, std::size_t count, const std::vector<int>& row0, Step step,
                 std::vector<int>& rows) {
  const std::size_t w = a.size() + 1;
  rows.resize(count * w);
  std::copy(row0.begin(), row0.end(), rows.begin());
  std::vector<std::size_t> depth(count, 0);
  for (std::size_t k = 1; k < count; ++k) {
    const std::size_t parent = (k - 1) / 3;
    depth[k] = depth[parent] + 1;
    step(a, kAlphabet[(k - 1) % 3], depth[k], &rows[parent * w], &rows[k * w]);
  }
}

Verdict text_sim_exhaustive() {
  const auto t0 = Clock::now();
  const auto strings = all_strings();
  std::size_t pairs = 0;
  std::size_t mismatches = 0;
  std::string first;
  auto step = [](const std::string& a, char c, std::size_t, const int* up, int* cur) {
    cur[0] = 0;
    for (std::size_t j = 1; j <= a.size(); ++j) {
      cur[j] = a[j - 1] == c ? up[j - 1] + 1 : std::max(up[j], cur[j - 1]);
    }
  };
  std::vector<int> rows;
  for (const std::string& a : strings) {
    prefix_rows(a, strings.size(), std::vector<int>(a.size() + 1, 0), step, rows);
    const std::size_t w = a.size() + 1;
    for (std::size_t k = 0; k < strings.size(); ++k) {
      const std::string& b = strings[k];
      const std::size_t longest = std::max(a.size(), b.size());
      const double want =
          longest == 0 ? 1.0 : static_cast<double>(rows[k * w + a.size()]) / static_cast<double>(longest);
      ++pairs;
      if (text_sim(a, b) != want && mismatches++ == 0) first = fmt::format("'{}' vs '{}'", a, b);
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          fmt::format("{} pairs, {} mismatches{}, {:.2f} s (limit 10 s)", pairs, mismatches,
                      first.empty() ? "" : " first " + first, secs)};
}

Verdict levenshtein_exhaustive() {
  const auto t0 = Clock::now();
  const auto strings = all_strings();
  std::size_t pairs = 0;
  std::size_t mismatches = 0;
  auto step = [](const std::string& a, char c, std::size_t depth, const int* up, int* cur) {
    cur[0] = static_cast<int>(depth);
    for (std::size_t j = 1; j <= a.size(); ++j) {
      cur[j] = std::min({up[j] + 1, cur[j - 1] + 1, up[j - 1] + (a[j - 1] == c ? 0 : 1)});
    }
  };
  std::vector<std::u32string> wide;
  wide.reserve(strings.size());
  for (const std::string& s : strings) wide.emplace_back(s.begin(), s.end());
  std::vector<int> rows;
  for (std::size_t ia = 0; ia < strings.size(); ++ia) {
    const std::string& a = strings[ia];
    std::vector<int> row0(a.size() + 1);
    std::iota(row0.begin(), row0.end(), 0);
    prefix_rows(a, strings.size(), row0, step, rows);
    const std::size_t w = a.size() + 1;
    for (std::size_t k = 0; k < strings.size(); ++k) {
      ++pairs;
      const auto want = static_cast<std::size_t>(rows[k * w + a.size()]);
      if (levenshtein(wide[ia], wide[k]) != want) ++mismatches;
      if (!a.empty()) {
        const double cer = cer_element(a, strings[k], true);
        if (cer != static_cast<double>(want) / static_cast<double>(a.size())) ++mismatches;
      }
    }
  }
  return {mismatches == 0, fmt::format("{} pairs (distance and CER), {} mismatches, {:.2f} s", pairs,
                                       mismatches, seconds_since(t0))};
}

// ---------------------------------------------------------------- map50

Verdict map50_exhaustive() {
  const std::vector<BBox> shapes{{10, 10, 50, 50},   // A
                                 {14, 10, 54, 50},   // IoU 0.82 with A
                                 {30, 10, 70, 50},   // IoU 0.33 with A
                                 {10, 10, 50, 90},   // IoU exactly 0.5 with A
                                 {60, 60, 90, 90}};  // disjoint
  std::vector<LayoutElement> pool;
  for (Category c : {Category::kText, Category::kTable}) {
    for (const BBox& b : shapes) pool.push_back(testing::element(b.x0, b.y0, b.x1, b.y1, c));
  }
  std::vector<std::vector<LayoutElement>> seqs{{}};
  for (std::size_t begin = 0; seqs.back().size() < 3;) {
    const std::size_t end = seqs.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& e : pool) {
        auto s = seqs[i];
        s.push_back(e);
        seqs.push_back(std::move(s));
      }
    }
    begin = end;
  }
  std::size_t configs = 0;
  std::size_t mismatches = 0;
  double worst = 0.0;
  for (const auto& truth : seqs) {
    if (truth.empty()) continue;
    const AnnotationSet ann = testing::annotations(truth, 100, 100);
    for (const auto& preds : seqs) {
      ++configs;
      const auto got = map50(ann, testing::page(preds, 100, 100));
      const double want = oracle::map50(truth, preds);
      const double err = got ? std::abs(*got - want) : 1.0;
      worst = std::max(worst, err);
      if (err > 1e-12) ++mismatches;
    }
  }
  return {mismatches == 0, fmt::format("{} configurations, {} beyond 1e-12, max error {:.3g}", configs,
                                       mismatches, worst)};
}

// ---------------------------------------------------------------- spearman

Verdict spearman_exhaustive() {
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  double worst = 0.0;
  auto check = [&](const std::vector<double>& x, const std::vector<double>& y, double want) {
    ++cases;
    const stats::Correlation got = stats::spearman(x, y);
    const double err = std::abs(got.rho - want);
    worst = std::max(worst, err);
    if (got.degenerate || err > 1e-12) ++mismatches;
  };
  for (int n = 2; n <= 6; ++n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    std::iota(x.begin(), x.end(), 1.0);
    std::vector<double> y = x;
    do {
      double d2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
      check(x, y, 1.0 - 6.0 * d2 / (n * (n * n - 1.0)));
    } while (std::next_permutation(y.begin(), y.end()));
    // Tied values: every vector over {0, 1, 2} against every other.
    std::vector<std::vector<double>> tied;
    const int total = static_cast<int>(std::pow(3, n));
    for (int code = 0; code < total; ++code) {
      std::vector<double> v;
      for (int k = 0, c = code; k < n; ++k, c /= 3) v.push_back(c % 3);
      if (std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) != v.end()) {
        tied.push_back(std::move(v));
      }
    }
    for (const auto& a : tied) {
      for (const auto& b : tied) check(a, b, oracle::spearman(a, b));
    }
  }
  return {mismatches == 0,
          fmt::format("{} cases (permutations and ties, n<=6), {} beyond 1e-12, max error {:.3g}", cases,
                      mismatches, worst)};
}

// ---------------------------------------------------------------- campaign

struct Corpus {
  testing::TempDir dir{"acceptance"};
  std::vector<SyntheticPage> pages;
  std::vector<PoolPage> pool;
};

struct AuditLog {
  std::mutex lock;
  std::vector<std::tuple<std::string, std::string, DiagnosticRecord>> audits;
};

struct Phase1Run {
  CampaignResult result;
  std::string csv;
  double seconds = 0.0;
};

Phase1Run run_fixed(const Corpus& corpus, AuditLog* log) {
  MockParserAdapter adapter;
  CampaignOptions opt;
  opt.configs = matrix(MatrixKind::kFixed);
  if (log != nullptr) {
    opt.observer = [log](const std::string& image, const std::string& config,
                         const DiagnosticRecord& r) {
      const std::lock_guard<std::mutex> hold(log->lock);
      log->audits.emplace_back(image, config, r);
    };
  }
  const auto t0 = Clock::now();
  Phase1Run run;
  run.result = run_phase1(corpus.pool, adapter, opt);
  std::ostringstream out;
  write_csv(out, run.result.records);
  run.csv = out.str();
  run.seconds = seconds_since(t0);
  return run;
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }
bool in_unit(const std::optional<double>& v) { return !v || in_unit(*v); }

bool near_ulp(double a, double b) {
  return std::abs(a - b) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a));
}

Verdict structural_identities(const AuditLog& log, std::size_t expected) {
  const AuditThresholds th;
  std::size_t bad = 0;
  std::string first;
  auto fail = [&](const std::string& what) {
    if (bad++ == 0) first = what;
  };
  for (const auto& [image, config, r] : log.audits) {
    const std::string key = image + "/" + config;
    const BSlr& s = r.structural;
    const std::size_t topo = r.n_merge + r.n_misclass + r.n_degraded;
    if (r.n_miss + topo != s.failed) fail(key + ": miss + topo counts != failed");
    if (!near_ulp(r.slr_miss + r.slr_topo, s.b_slr)) fail(key + ": SLR_miss + SLR_topo != B-SLR");
    if (s.iou_failed + s.text_failed != s.failed) fail(key + ": channel counts do not add up");
    if (!near_ulp(s.iou_only + s.text_only, s.b_slr)) fail(key + ": channel ratios do not add up");
    if (r.rows.size() != s.total || s.total != r.n_orig_spans) fail(key + ": rows do not cover E");
    std::size_t labelled[5] = {0, 0, 0, 0, 0};
    for (const ElementAuditRow& row : r.rows) {
      ++labelled[static_cast<int>(row.label)];
      const bool failed = row.iou < th.tau_iou || row.text_sim < th.tau_text;
      if (failed != (row.label != Pathway::kIntact)) fail(key + ": label disagrees with gates");
    }
    if (labelled[1] != r.n_miss || labelled[2] != r.n_merge || labelled[3] != r.n_misclass ||
        labelled[4] != r.n_degraded || labelled[0] + s.failed != s.total) {
      fail(key + ": pathway labels do not partition the failed set");
    }
    const ExposureDescriptors& e = r.exposure;
    if (!in_unit(e.tor) || !in_unit(e.acr) || !in_unit(e.bpo) || !in_unit(e.boc) || !in_unit(e.eir) ||
        !in_unit(s.b_slr)) {
      fail(key + ": descriptor outside [0, 1]");
    }
  }
  const bool complete = log.audits.size() == expected;
  return {bad == 0 && complete,
          fmt::format("{} audits (expected {}), {} violations{}", log.audits.size(), expected, bad,
                      first.empty() ? "" : ", first: " + first)};
}

Mask random_shape(Rng& rng, int w, int h) {
  Mask m(w, h);
  const auto parts = rng.uniform_int(1, 4);
  for (std::int64_t i = 0; i < parts; ++i) {
    const Pose p{static_cast<int>(rng.uniform_int(0, w - 1)), static_cast<int>(rng.uniform_int(0, h - 1))};
    if (rng.bernoulli(0.5)) {
      m |= disk_support(p, rng.uniform(3.0, 90.0), w, h);
    } else {
      const int rw = static_cast<int>(rng.uniform_int(1, 300));
      const int rh = static_cast<int>(rng.uniform_int(1, 40));
      m.fill({std::max(0, p.x - rw / 2), std::max(0, p.y - rh / 2), std::min(w, p.x + rw / 2 + 1),
              std::min(h, p.y + rh / 2 + 1)});
    }
  }
  return m;
}

Verdict descriptor_monotonicity(const Corpus& corpus) {
  Rng rng(20250);
  std::size_t violations = 0;
  const int pairs = 1000;
  for (int t = 0; t < pairs; ++t) {
    const SyntheticPage& page = corpus.pages[static_cast<std::size_t>(t) % corpus.pages.size()];
    const int w = page.image.cols;
    const int h = page.image.rows;
    const AnnotationGeometry geometry(page.annotations, w, h);
    ParseOutput clean;
    clean.page_width = w;
    clean.page_height = h;
    clean.elements = page.annotations.elements;
    const Mask small = random_shape(rng, w, h);
    Mask large = small;
    large |= random_shape(rng, w, h);
    const ExposureDescriptors a = exposure(small, &geometry, clean);
    const ExposureDescriptors b = exposure(large, &geometry, clean);
    const bool ok = b.tor >= a.tor && *b.acr >= *a.acr && *b.bpo >= *a.bpo && *b.boc >= *a.boc &&
                    b.eir >= a.eir;
    if (!ok) ++violations;
  }
  return {violations == 0, fmt::format("{} superset pairs, {} with a descriptor decreasing", pairs, violations)};
}

Verdict blob_equals_disk() {
  Rng rng(777);
  const ParamRange rb = catalog(ProbeId::kP8).range(ProbeParam::kBaseRadius).value();
  std::size_t differing = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    const Pose p{static_cast<int>(rng.uniform_int(-20, 869)), static_cast<int>(rng.uniform_int(-20, 1119))};
    const double r = rng.uniform(rb.lo, rb.hi);
    if (!(blob_support(p, r, 0.0, rng.next(), 850, 1100) == disk_support(p, r, 850, 1100))) ++differing;
  }
  return {differing == 0, fmt::format("{} random poses and radii in [{}, {}], {} differing masks", trials,
                                      rb.lo, rb.hi, differing)};
}

Verdict nt_targets(const CampaignResult& run, const AuditLog& log) {
  const std::vector<double> want{0.05, 0.10, 0.20, 0.35, 0.50, 0.70, 1.0};
  std::vector<double> targets;
  for (const ConfigSpec& c : matrix(MatrixKind::kNt)) targets.push_back(c.nt_target);
  std::map<std::pair<std::string, std::string>, double> eir;
  for (const auto& [image, config, r] : log.audits) eir[{image, config}] = r.exposure.eir;
  std::size_t entries = 0;
  std::size_t reached = 0;
  std::size_t shortfall = 0;
  std::size_t bad = 0;
  for (const auto& p : run.params) {
    if (!p.contains("nt")) continue;
    ++entries;
    const auto& nt = p.at("nt");
    const double target = nt.at("target").get<double>();
    const double achieved = nt.at("achieved").get<double>();
    const bool short_of = nt.at("shortfall").get<bool>();
    if (short_of) {
      ++shortfall;
      if (achieved >= target) ++bad;
    } else {
      ++reached;
      if (achieved + 1e-12 < target) ++bad;
    }
    const auto it = eir.find({p.at("image_id").get<std::string>(), p.at("config_id").get<std::string>()});
    if (it == eir.end() || it->second != achieved) ++bad;
  }
  const bool ok = targets == want && entries == 7 * 100 && bad == 0;
  return {ok, fmt::format("{} placements: {} reached, {} reported shortfall, {} inconsistent "
                          "(achieved vs target flag or vs audited EIR)",
                          entries, reached, shortfall, bad)};
}

Verdict paired_sweeps(const Corpus& corpus) {
  MockParserAdapter adapter;
  CampaignOptions opt;
  opt.configs = {decode_config("S01"), decode_config("S10"), decode_config("S11")};
  const CampaignResult r = run_phase1(corpus.pool, adapter, opt);
  std::map<std::string, std::map<std::string, nlohmann::json>> probes;
  for (const auto& p : r.params) {
    if (!p.contains("probe")) continue;
    probes[p.at("image_id").get<std::string>()][p.at("config_id").get<std::string>()] = p.at("probe");
  }
  std::size_t images = 0;
  std::size_t mismatched = 0;
  std::size_t same_placement = 0;
  for (auto& [image, by_config] : probes) {
    if (by_config.size() != 3) {
      ++mismatched;
      continue;
    }
    ++images;
    std::set<std::string> placements;
    nlohmann::json shared;
    bool first = true;
    for (auto& [config, probe] : by_config) {
      placements.insert(probe.at("placement").get<std::string>());
      nlohmann::json rest = probe;
      rest.erase("placement");
      if (first) {
        shared = rest;
        first = false;
      } else if (rest != shared) {
        ++mismatched;
      }
    }
    if (placements.size() != 3) ++same_placement;
  }
  const bool ok = images == corpus.pool.size() && mismatched == 0 && same_placement == 0;
  return {ok, fmt::format("{} images; {} with differing geometry/appearance/behavior, {} with "
                          "non-distinct placements",
                          images, mismatched, same_placement)};
}

Verdict determinism(const Phase1Run& first, const Phase1Run& second) {
  const bool same = first.csv == second.csv;
  const bool fast = first.seconds < 300.0;
  return {same && fast && first.result.records.size() == 2900,
          fmt::format("{} records, {} bytes, rerun {}; first run {:.1f} s (limit 300 s)",
                      first.result.records.size(), first.csv.size(), same ? "byte-identical" : "DIFFERS",
                      first.seconds)};
}

Verdict footprint_bias(const Corpus& corpus) {
  std::vector<QaPair> qa;
  for (std::size_t i = 0; i < corpus.pages.size(); ++i) {
    for (QaPair q : template_qa(corpus.pages[i].annotations)) {
      q.page_id = corpus.pool[i].id;
      qa.push_back(std::move(q));
    }
  }
  MockParserAdapter adapter;
  const DownstreamResult r = run_downstream(corpus.pool, adapter, qa);
  const auto get = [&](Condition c) -> const ConditionSummary& {
    return r.summary[static_cast<std::size_t>(c)];
  };
  const ConditionSummary& clean = get(Condition::kClean);
  const ConditionSummary& am = get(Condition::kAreaMatched);
  const ConditionSummary& str = get(Condition::kStructural);
  const double tor_gap = std::abs(am.mean_tor - str.mean_tor) / str.mean_tor;
  const bool tor_ok = tor_gap <= 0.10;
  const bool bslr_ok = str.mean_b_slr > 0.0 && str.mean_b_slr >= 5.0 * am.mean_b_slr;
  const bool drop_ok = str.bm25.answer_hit_5 <= am.bm25.answer_hit_5 - 10.0;
  const bool am_ok = std::abs(am.bm25.answer_hit_5 - clean.bm25.answer_hit_5) <= 2.0;
  return {tor_ok && bslr_ok && drop_ok && am_ok && r.skips.empty(),
          fmt::format("{} QA on {} pages; TOR AM {:.5f} vs Str {:.5f} (gap {:.1f}%); B-SLR Str {:.4f} vs "
                      "AM {:.4f}; AnswerHit@5 clean {:.2f}, AM {:.2f}, Str {:.2f}; {} skips",
                      clean.bm25.n, clean.pages, am.mean_tor, str.mean_tor, 100 * tor_gap,
                      str.mean_b_slr, am.mean_b_slr, clean.bm25.answer_hit_5, am.bm25.answer_hit_5,
                      str.bm25.answer_hit_5, r.skips.size())};
}

Verdict faithfulness_constructed() {
  Rng rng(4242);
  std::vector<CampaignRecord> records;
  const auto configs = matrix(MatrixKind::kFixed);
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const double level = rng.uniform(0.0, 0.6);
    for (int i = 0; i < 100; ++i) {
      CampaignRecord r;
      r.image_id = fmt::format("page_{:04d}", i);
      r.config_id = configs[c].id;
      r.b_slr = std::clamp(level + rng.uniform(-0.1, 0.1), 0.0, 1.0);
      r.cer = 0.8 * r.b_slr + 0.05 + rng.uniform(-0.05, 0.05);
      records.push_back(r);
    }
  }
  const auto agg = stats::aggregate_by_config(records);
  const stats::Regression fit = stats::faithfulness(agg, Variable::kBSlr, Variable::kCer);
  return {fit.r2 > 0.9, fmt::format("{} configs x 100 images, CER = 0.8 B-SLR + 0.05 + U(-0.05, 0.05): "
                                    "R2 {:.4f} (needs > 0.9), slope {:.3f}",
                                    agg.size(), fit.r2, fit.slope)};
}

Verdict nt_dose_response(const CampaignResult& run) {
  std::vector<std::string> ids;
  for (const ConfigSpec& c : matrix(MatrixKind::kNt)) ids.push_back(c.id);
  std::vector<CampaignRecord> nt;
  for (const CampaignRecord& r : run.records) {
    if (std::find(ids.begin(), ids.end(), r.config_id) != ids.end()) nt.push_back(r);
  }
  std::vector<double> means;
  for (const stats::Aggregate& a : stats::aggregate_by_config(nt)) means.push_back(a.mean(Variable::kBSlr).value_or(0.0));
  int consistent = 0;
  double running = -1.0;
  std::string listing;
  for (double m : means) {
    if (m >= running) ++consistent;
    running = std::max(running, m);
    listing += fmt::format("{}{:.5f}", listing.empty() ? "" : " ", m);
  }
  return {means.size() == 7 && consistent >= 6,
          fmt::format("mean B-SLR by target: {}; {} of {} at or above every lower target (needs 6)", listing,
                      consistent, means.size())};
}

// ---------------------------------------------------------------- retrieval

Verdict bm25_toy_oracle() {
  const std::vector<std::string> vocab{"ant", "bee", "cat", "dog", "eel", "fox", "gnu", "hen"};
  Rng rng(99);
  std::size_t checks = 0;
  double worst = 0.0;
  for (int corpus = 0; corpus < 200; ++corpus) {
    std::vector<std::vector<std::string>> docs(static_cast<std::size_t>(rng.uniform_int(1, 8)));
    std::vector<Chunk> chunks;
    for (auto& d : docs) {
      const auto len = rng.uniform_int(1, 12);
      Chunk c;
      for (std::int64_t i = 0; i < len; ++i) {
        d.push_back(vocab[static_cast<std::size_t>(rng.uniform_int(0, 7))]);
        c.text += (i ? " " : "") + d.back();
      }
      chunks.push_back(std::move(c));
    }
    const Bm25Index index(chunks);
    double avg = 0.0;
    for (const auto& d : docs) avg += static_cast<double>(d.size());
    avg /= static_cast<double>(docs.size());
    for (int q = 0; q < 5; ++q) {
      std::vector<std::string> query;
      std::string qtext;
      for (std::int64_t i = 0, n = rng.uniform_int(1, 4); i < n; ++i) {
        query.push_back(vocab[static_cast<std::size_t>(rng.uniform_int(0, 7))]);
        qtext += (i ? " " : "") + query.back();
      }
      const auto got = index.scores(qtext);
      for (std::size_t d = 0; d < docs.size(); ++d) {
        double want = 0.0;
        for (const std::string& term : query) {
          const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), term));
          double df = 0.0;
          for (const auto& other : docs) df += std::count(other.begin(), other.end(), term) > 0 ? 1.0 : 0.0;
          if (tf > 0.0) {
            want += oracle::bm25_term_score(tf, df, static_cast<double>(docs.size()),
                                            static_cast<double>(docs[d].size()), avg, 1.5, 0.75);
          }
        }
        worst = std::max(worst, std::abs(got[d] - want));
        ++checks;
      }
    }
  }
  return {worst <= 1e-9, fmt::format("{} document scores over 200 toy corpora, max error {:.3g} (limit 1e-9)",
                                     checks, worst)};
}

Verdict chunk_bounds() {
  Rng rng(31337);
  const ChunkOptions opt;
  const std::vector<std::string> words{"layout", "parser", "block", "table", "figure", "caption",
                                       "the", "of", "a", "structure", "analysis", "document"};
  std::size_t pages = 0;
  std::size_t chunks_seen = 0;
  std::size_t hard = 0;
  std::size_t soft = 0;
  std::size_t bad = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<LayoutElement> els;
    for (std::int64_t i = 0, n = rng.uniform_int(1, 16); i < n; ++i) {
      std::string text;
      const auto target = rng.uniform_int(0, 1200);
      while (static_cast<std::int64_t>(text.size()) < target) {
        text += (text.empty() ? "" : " ") + words[static_cast<std::size_t>(rng.uniform_int(0, 11))];
      }
      els.push_back(testing::element(0, 10.0 * i, 100, 10.0 * i + 8, Category::kText, text));
    }
    const ParseOutput parse = testing::page(els);
    const std::string full = page_text(parse);
    const auto chunks = chunk(parse, opt);
    ++pages;
    if (full.empty()) {
      if (!chunks.empty()) ++bad;
      continue;
    }
    if (chunks.empty() || chunks.front().begin != 0 || chunks.back().end != full.size()) {
      ++bad;
      continue;
    }
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const Chunk& c = chunks[i];
      ++chunks_seen;
      const bool short_page = chunks.size() == 1 && full.size() < opt.min;
      if (c.text.size() > opt.max || (c.text.size() < opt.min && !short_page)) ++bad;
      if (c.text != full.substr(c.begin, c.end - c.begin)) ++bad;
      if (i == 0) continue;
      const Chunk& prev = chunks[i - 1];
      if (prev.end - c.begin == opt.overlap && prev.end > c.begin) {
        ++hard;
      } else if (c.begin == prev.end + 1 && full[prev.end] == '\n') {
        ++soft;
      } else {
        ++bad;
      }
    }
  }
  return {bad == 0 && hard > 0,
          fmt::format("{} parses, {} chunks in [{}, {}]; {} hard cuts overlapping {}, {} element-boundary "
                      "cuts; {} violations",
                      pages, chunks_seen, opt.min, opt.max, hard, opt.overlap, soft, bad)};
}

}  // namespace

// Optional argument: run only criteria whose name contains it.
int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const auto selected = [&](const char* name) { return std::string(name).find(filter) != std::string::npos; };
  int failures = 0;
  auto report = [&](const char* name, const Verdict& v) {
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  };
  auto guarded = [&](const char* name, const std::function<Verdict()>& f) {
    if (!selected(name)) return;
    try {
      report(name, f());
    } catch (const std::exception& e) {
      report(name, {false, fmt::format("threw: {}", e.what())});
    }
  };

  guarded("metric.text_sim_exhaustive", text_sim_exhaustive);
  guarded("metric.levenshtein_exhaustive", levenshtein_exhaustive);
  guarded("metric.map50_exhaustive", map50_exhaustive);
  guarded("metric.spearman_exhaustive", spearman_exhaustive);

  const char* const campaign_criteria[] = {"structural.identities", "probe.nt_targets",
                                           "determinism.byte_identical_rerun",
                                           "statistics.nt_dose_response"};
  const bool need_runs = std::any_of(std::begin(campaign_criteria), std::end(campaign_criteria), selected);
  Corpus corpus;
  corpus.pages = testing::write_synthetic_pool(corpus.dir.path(), 100);
  corpus.pool = scan_pool(corpus.dir.path());
  AuditLog log;
  Phase1Run first;
  Phase1Run second;
  bool have_runs = false;
  if (need_runs) {
    try {
      first = run_fixed(corpus, &log);
      second = run_fixed(corpus, nullptr);
      have_runs = true;
    } catch (const std::exception& e) {
      std::printf("campaign threw: %s\n", e.what());
    }
  }
  auto with_runs = [&](const char* name, const std::function<Verdict()>& f) {
    if (have_runs) {
      guarded(name, f);
    } else if (selected(name)) {
      report(name, {false, "campaign did not run"});
    }
  };

  with_runs("structural.identities", [&] { return structural_identities(log, 2900); });
  guarded("structural.descriptor_monotonicity", [&] { return descriptor_monotonicity(corpus); });
  guarded("probe.blob_kappa0_equals_disk", blob_equals_disk);
  with_runs("probe.nt_targets", [&] { return nt_targets(first.result, log); });
  guarded("probe.paired_sweeps_share_parameters", [&] { return paired_sweeps(corpus); });
  with_runs("determinism.byte_identical_rerun", [&] { return determinism(first, second); });
  guarded("footprint_bias.structural_vs_area_matched", [&] { return footprint_bias(corpus); });
  guarded("statistics.faithfulness_constructed", faithfulness_constructed);
  with_runs("statistics.nt_dose_response", [&] { return nt_dose_response(first.result); });
  guarded("downstream.bm25_toy_oracle", bm25_toy_oracle);
  guarded("downstream.chunk_bounds", chunk_bounds);

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
